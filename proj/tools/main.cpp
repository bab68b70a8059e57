#include "manakov/cli.hpp"

int main(int argc, char** argv) { return manakov::cli::dispatch(argc, argv); }
