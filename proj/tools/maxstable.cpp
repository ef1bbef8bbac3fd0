#include "maxstable/cli.hpp"

int main(int argc, char** argv)
{
    return maxstable::cli::run(argc, argv);
}
