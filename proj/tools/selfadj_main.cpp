#include "selfadj/cli.hpp"

int main(int argc, char** argv) { return selfadj::cli::dispatch(argc, argv); }
