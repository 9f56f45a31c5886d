#include "sslt/cli.hpp"

int main(int argc, char** argv) {
    return sslt::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
