#include "droidlens/cli/app.hpp"

int main(int argc, char** argv) { return droidlens::cli::run_cli(argc, argv); }
