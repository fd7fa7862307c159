#include <iostream>
#include <string>
#include <vector>

#include "rabidimer/runner.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const rabidimer::ParseResult parsed = rabidimer::parse_args(args);
    if (!parsed.spec) {
        (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << '\n';
        return parsed.exit_code;
    }
    return rabidimer::execute(*parsed.spec);
}
