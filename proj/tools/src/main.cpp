#include "pam_cli/commands.hpp"

int main(int argc, char** argv) { return pam::cli::run(argc, argv); }
