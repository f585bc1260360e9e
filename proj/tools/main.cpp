#include "experiment.hpp"

int main(int argc, char** argv) { return adacur::cli::run_experiment(argc, argv); }
