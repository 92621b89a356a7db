#include "fieldscan/cli.hpp"

int main(int argc, char** argv) { return fieldscan::cli::run(argc, argv); }
