#include "memebot/service/cli.hpp"

int main(int argc, char** argv) { return memebot::cli::run(argc, argv); }
