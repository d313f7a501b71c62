#ifndef VIP_CLI_HPP
#define VIP_CLI_HPP

#include <openssl/evp.h>

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vip/study.hpp"

namespace vip {

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

/// Collects output files and writes them together with the run manifest.
class RunOutput {
 public:
  RunOutput(std::filesystem::path dir, std::string command, std::string config_path, const RunConfig& cfg)
      : dir_(std::move(dir)), command_(std::move(command)), config_path_(std::move(config_path)), cfg_(cfg) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& text) {
    write_text_file((dir_ / name).string(), text);
    files_.emplace_back(name, sha256_hex(text));
  }
  void write(const std::string& name, const CsvTable& t) { write(name, to_csv_string(t)); }

  void fail(const std::string& message) { failure_ = message; }

  void finish() {
    std::ostringstream m;
    m << "command=" << command_ << '\n' << "config=" << config_path_ << '\n';
    for (const auto& [k, v] : cfg_.entries()) m << k << '=' << v << '\n';
    m << "status=" << (failure_.empty() ? "ok" : "failed") << '\n';
    if (!failure_.empty()) m << "failure=" << failure_ << '\n';
    for (const auto& [name, hash] : files_) m << "sha256." << name << '=' << hash << '\n';
    write_text_file((dir_ / "manifest.txt").string(), m.str());
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string command_, config_path_;
  RunConfig cfg_;
  std::string failure_;
  std::vector<std::pair<std::string, std::string>> files_;
};

namespace detail {

inline int exit_code(ErrorKind k) {
  return k == ErrorKind::Config || k == ErrorKind::Io || k == ErrorKind::NonconformingSpacing ? 2 : 1;
}

inline int run_converge(const RunConfig& cfg, RunOutput& out, bool with_solution, std::ostream& log) {
  const StudyResult r = run_convergence_study(cfg);
  out.write("errors.csv", errors_table(r.records));
  if (with_solution && r.finest) {
    out.write("solution.csv", solution_table(r.finest_nodes, *r.finest));
    out.write("report.txt", r.finest_report->to_text());
  }
  for (const auto& e : r.records) {
    log << "h=" << format_double(e.h) << " e_DU=" << format_double(e.e_du) << " e_P=" << format_double(e.e_p)
        << " e_U=" << format_double(e.e_u) << '\n';
  }
  if (!r.complete) {
    out.fail(r.failure);
    log << "study aborted: " << r.failure << '\n';
    return exit_code(r.failure_kind);
  }
  return 0;
}

inline int run_kovasznay(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const KovasznayResult r = run_kovasznay_study(cfg);
  out.write("kovasznay_errors.csv", kovasznay_table(r.records));
  std::vector<std::pair<double, std::vector<PicardStep>>> traces;
  for (const auto& rec : r.records) {
    traces.emplace_back(rec.h, rec.trace);
    log << "h=" << format_double(rec.h) << " e_U=" << format_double(rec.e_u) << " iterations=" << rec.iterations
        << '\n';
  }
  out.write("picard_trace.csv", trace_table(traces));
  if (!r.complete) {
    out.fail(r.failure);
    log << "run aborted: " << r.failure << '\n';
    return exit_code(r.failure_kind);
  }
  return 0;
}

inline int run_cavity_cmd(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const double h = cfg.h.back();
  CavityResult r;
  try {
    r = run_cavity(cfg, h);
  } catch (const NoConvergence& e) {
    out.write("picard_trace.csv", trace_table({{h, e.last().trace}}));
    throw;
  }
  out.write("centerline_u.csv", centerline_table(r.u_line, "y", "u"));
  out.write("centerline_v.csv", centerline_table(r.v_line, "x", "v"));
  out.write("field.csv", cavity_field_table(r));
  out.write("picard_trace.csv", trace_table({{h, r.trace}}));
  CsvTable s;
  s.header = {"re", "h", "iterations", "max_dev_u", "max_dev_v", "primary_vortices", "vortex_x", "vortex_y"};
  std::optional<double> du, dv;
  if (r.reference) {
    du = r.max_dev_u;
    dv = r.max_dev_v;
    out.write("ghia_u.csv", comparison_table(r.reference->y, r.u_at_ref, r.reference->u, "y", "u"));
    if (!r.reference->x.empty()) {
      out.write("ghia_v.csv", comparison_table(r.reference->x, r.v_at_ref, r.reference->v, "x", "v"));
    } else {
      dv.reset();
    }
  }
  s.add({r.re, h, static_cast<double>(r.trace.size()), du, dv, static_cast<double>(r.primary_vortices),
         r.vortex_center[0], r.vortex_center[1]});
  out.write("cavity_summary.csv", s);
  log << "Re=" << format_double(r.re) << " h=" << format_double(h) << " iterations=" << r.trace.size()
      << " primary_vortices=" << r.primary_vortices;
  if (du) log << " max_dev_u=" << format_double(*du);
  log << '\n';
  return 0;
}

inline int run_infsup(const RunConfig& cfg, RunOutput& out, std::ostream& log) {
  const auto rec = run_infsup_study(cfg);
  out.write("infsup.csv", infsup_table(rec));
  for (const auto& r : rec) log << "h=" << format_double(r.h) << " mu=" << format_double(r.mu) << '\n';
  return 0;
}

/// A relative cavity reference is looked up next to the config file.
inline void resolve_paths(RunConfig& cfg, const std::string& config_path) {
  namespace fs = std::filesystem;
  if (!cfg.reference.empty() && fs::path(cfg.reference).is_relative()) {
    cfg.reference = (fs::path(config_path).parent_path() / cfg.reference).lexically_normal().string();
  }
}

}  // namespace detail

/// Exit codes: 0 success, 1 solver failure, 2 configuration or usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Virtual-grid MLSRK Stokes and Navier-Stokes benchmarks", "vip"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"converge", "manufactured-solution convergence study (errors.csv)"},
      {"kovasznay", "Kovasznay flow Picard runs (kovasznay_errors.csv, picard_trace.csv)"},
      {"cavity", "lid-driven cavity at the finest h (centerlines, field, Ghia comparison)"},
      {"infsup", "discrete inf-sup constant per h (infsup.csv)"},
      {"solve", "run the pipeline named by problem.kind"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "sectioned key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
  }
  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    err << "unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      log << app.help();
      return 0;
    }
    err << e.what() << "\n\n" << app.help();
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    detail::resolve_paths(cfg, config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  std::string kind = cfg.kind;
  if (command == "converge") kind = "converge";
  if (command == "kovasznay") kind = "kovasznay";
  if (command == "cavity") kind = "cavity";
  if (command == "infsup") kind = "infsup-study";
  cfg.kind = kind;

  std::optional<RunOutput> out;
  try {
    out.emplace(cfg.out_dir, command, config_path, cfg);
    int code = 0;
    if (kind == "converge") code = detail::run_converge(cfg, *out, false, log);
    if (kind == "stokes-manufactured") code = detail::run_converge(cfg, *out, true, log);
    if (kind == "kovasznay") code = detail::run_kovasznay(cfg, *out, log);
    if (kind == "cavity") code = detail::run_cavity_cmd(cfg, *out, log);
    if (kind == "infsup-study") code = detail::run_infsup(cfg, *out, log);
    out->finish();
    return code;
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << '\n';
    if (out) {
      out->fail(std::string(to_string(e.kind())) + ": " + e.what());
      try {
        out->finish();
      } catch (const Error&) {
      }
    }
    return detail::exit_code(e.kind());
  }
}

}  // namespace vip

#endif
