#include <iostream>

#include "support/golden.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: golden_record FILE.jsonl...\n";
        return 2;
    }
    for (int i = 1; i < argc; ++i) polyvm::testing::golden::record_file(argv[i]);
    return 0;
}
