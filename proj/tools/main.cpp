#include "app/commands.hpp"

int main(int argc, char** argv) { return spectracal::app::run_cli(argc, argv); }
