#include "fhlab/run.hpp"

int main(int argc, char** argv) { return fhlab::run::run_cli(argc, argv); }
