#include <iostream>

#include "handsign/cli.hpp"
#include "handsign/runtime.hpp"

int main(int argc, char** argv)
{
    handsign::tune_allocator();
    return handsign::cli::run(argc, argv, std::cout, std::cerr);
}
