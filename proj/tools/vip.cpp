#include "vip/cli.hpp"

int main(int argc, char** argv) { return vip::cli_main(argc, argv); }
