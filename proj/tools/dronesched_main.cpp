#include "dronesched/cli.hpp"

int main(int argc, char** argv) { return dronesched::run_cli(argc, argv); }
