#include <iostream>

#include "jurirag/cli.hpp"

int main(int argc, char** argv) {
    jurirag::HttplibTransport transport;
    return jurirag::run_cli(argc, argv, std::cout, std::cerr, transport);
}
