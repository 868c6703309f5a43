#include "eps/cli/app.hpp"

int main(int argc, char** argv) { return eps::cli::run(argc, argv); }
