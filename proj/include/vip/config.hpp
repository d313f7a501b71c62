#ifndef VIP_CONFIG_HPP
#define VIP_CONFIG_HPP

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vip/csv.hpp"
#include "vip/navier_stokes.hpp"

namespace vip {

/// Resolved run configuration. Every field has a default; `entries()` lists
/// the fully resolved key/value pairs for the run manifest.
struct RunConfig {
  // [problem]
  std::string kind = "converge";      // stokes-manufactured | kovasznay | cavity | infsup-study | converge
  std::string solution = "taylor-green";  // taylor-green | polynomial (manufactured problems)
  std::string boundary = "periodic";  // periodic | dirichlet (manufactured problems)
  std::vector<double> h{1.0 / 8, 1.0 / 16, 1.0 / 32};
  std::vector<std::string> h_text{"1/8", "1/16", "1/32"};
  double re = 100.0;

  // [discretization]
  int degree = 2;
  double dilation = 2.6;
  double perturbation = 0.0;
  std::uint64_t seed = 1;
  LaplacianMode laplacian = LaplacianMode::Composite;
  GradientMode gradient = GradientMode::Staggered;

  // [solver]
  double tolerance = 1e-10;
  PicardConfig picard;

  // [cavity]
  std::string reference;
  bool regularize = false;
  int samples = 129;

  // [output]
  std::string out_dir = "out";

  AssemblyConfig assembly() const {
    AssemblyConfig c;
    c.laplacian = laplacian;
    c.gradient = gradient;
    c.degree = degree;
    c.dilation = dilation;
    return c;
  }

  std::vector<std::pair<std::string, std::string>> entries() const {
    std::string hs;
    for (std::size_t i = 0; i < h_text.size(); ++i) hs += (i ? ", " : "") + h_text[i];
    return {
        {"problem.kind", kind},
        {"problem.solution", solution},
        {"problem.boundary", boundary},
        {"problem.h", hs},
        {"problem.re", format_double(re)},
        {"discretization.degree", std::to_string(degree)},
        {"discretization.dilation", format_double(dilation)},
        {"discretization.perturbation", format_double(perturbation)},
        {"discretization.seed", std::to_string(seed)},
        {"discretization.laplacian", to_string(laplacian)},
        {"discretization.gradient", to_string(gradient)},
        {"solver.tolerance", format_double(tolerance)},
        {"solver.picard_tolerance", format_double(picard.tol)},
        {"solver.max_iter", std::to_string(picard.max_iter)},
        {"solver.relaxation", format_double(picard.relaxation)},
        {"solver.fallback_relaxation", format_double(picard.fallback_relaxation)},
        {"cavity.reference", reference},
        {"cavity.regularize", regularize ? "true" : "false"},
        {"cavity.samples", std::to_string(samples)},
        {"output.dir", out_dir},
    };
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

/// "1/8" or "0.125".
inline double parse_spacing(const std::string& text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  try {
    if (slash == std::string::npos) return parse_double(t);
    const double num = parse_double(trim(t.substr(0, slash)));
    const double den = parse_double(trim(t.substr(slash + 1)));
    if (den == 0.0) throw Error(ErrorKind::Config, "zero denominator in '" + t + "'");
    return num / den;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, "bad spacing '" + t + "'");
  }
}

inline double number(const std::string& key, const std::string& v) {
  try {
    return parse_double(trim(v));
  } catch (const Error&) {
    throw Error(ErrorKind::Config, key + ": expected a number, got '" + v + "'");
  }
}

inline long integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  long out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorKind::Config, key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline bool boolean(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw Error(ErrorKind::Config, key + ": expected true or false, got '" + v + "'");
}

inline std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  const std::string t = trim(v);
  std::string list;
  for (const char* a : allowed) {
    if (t == a) return t;
    list += std::string(list.empty() ? "" : ", ") + a;
  }
  throw Error(ErrorKind::Config, key + ": '" + t + "' is not one of " + list);
}

}  // namespace detail

/// Sectioned key = value text (INI). Unknown sections or keys are errors.
inline RunConfig parse_config(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, std::string("malformed config: ") + e.what());
  }
  RunConfig c;
  std::set<std::string> seen_h;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorKind::Config, "key '" + section + "' outside a section");
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string v = node.data();
      if (full == "problem.kind") {
        c.kind = detail::one_of(full, v, {"stokes-manufactured", "kovasznay", "cavity", "infsup-study", "converge"});
      } else if (full == "problem.solution") {
        c.solution = detail::one_of(full, v, {"taylor-green", "polynomial"});
      } else if (full == "problem.boundary") {
        c.boundary = detail::one_of(full, v, {"periodic", "dirichlet"});
      } else if (full == "problem.h") {
        c.h.clear();
        c.h_text.clear();
        std::istringstream ls(v);
        std::string item;
        while (std::getline(ls, item, ',')) {
          c.h.push_back(detail::parse_spacing(item));
          c.h_text.push_back(detail::trim(item));
        }
      } else if (full == "problem.re") {
        c.re = detail::number(full, v);
      } else if (full == "discretization.degree") {
        c.degree = static_cast<int>(detail::integer(full, v));
      } else if (full == "discretization.dilation") {
        c.dilation = detail::number(full, v);
      } else if (full == "discretization.perturbation") {
        c.perturbation = detail::number(full, v);
      } else if (full == "discretization.seed") {
        c.seed = static_cast<std::uint64_t>(detail::integer(full, v));
      } else if (full == "discretization.laplacian") {
        c.laplacian = detail::one_of(full, v, {"composite", "direct"}) == "composite" ? LaplacianMode::Composite
                                                                                      : LaplacianMode::Direct;
      } else if (full == "discretization.gradient") {
        c.gradient = detail::one_of(full, v, {"staggered", "direct"}) == "staggered" ? GradientMode::Staggered
                                                                                     : GradientMode::Direct;
      } else if (full == "solver.tolerance") {
        c.tolerance = detail::number(full, v);
      } else if (full == "solver.picard_tolerance") {
        c.picard.tol = detail::number(full, v);
      } else if (full == "solver.max_iter") {
        c.picard.max_iter = static_cast<int>(detail::integer(full, v));
      } else if (full == "solver.relaxation") {
        c.picard.relaxation = detail::number(full, v);
      } else if (full == "solver.fallback_relaxation") {
        c.picard.fallback_relaxation = detail::number(full, v);
      } else if (full == "cavity.reference") {
        c.reference = detail::trim(v);
      } else if (full == "cavity.regularize") {
        c.regularize = detail::boolean(full, v);
      } else if (full == "cavity.samples") {
        c.samples = static_cast<int>(detail::integer(full, v));
      } else if (full == "output.dir") {
        c.out_dir = detail::trim(v);
      } else {
        throw Error(ErrorKind::Config, "unknown key '" + full + "'");
      }
    }
  }
  c.picard.re = c.re;

  if (c.h.empty()) throw Error(ErrorKind::Config, "problem.h is empty");
  for (double h : c.h) {
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "every h must be positive");
  }
  if (!std::is_sorted(c.h.rbegin(), c.h.rend()) || std::adjacent_find(c.h.begin(), c.h.end()) != c.h.end()) {
    throw Error(ErrorKind::Config, "problem.h must be strictly decreasing");
  }
  if (c.degree < 1 || c.degree > 4) throw Error(ErrorKind::Config, "discretization.degree must lie in 1..4");
  if (!(c.dilation > 0.0)) throw Error(ErrorKind::Config, "discretization.dilation must be positive");
  if (!(c.perturbation >= 0.0 && c.perturbation < 0.45)) {
    throw Error(ErrorKind::Config, "discretization.perturbation must lie in [0, 0.45)");
  }
  if (!(c.tolerance > 0.0)) throw Error(ErrorKind::Config, "solver.tolerance must be positive");
  if (c.samples < 2) throw Error(ErrorKind::Config, "cavity.samples must be at least 2");
  if (c.out_dir.empty()) throw Error(ErrorKind::Config, "output.dir is empty");
  c.picard.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Config, "cannot open config " + path);
  return parse_config(is);
}

}  // namespace vip

#endif
