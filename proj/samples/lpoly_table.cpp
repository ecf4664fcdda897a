// L-polynomial coefficients, #J(F_p) and z_p for the first good primes of
// each built-in curve (or one curve given by label).
//
//   lpoly_table [label] [max_p]

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

#include "ltq/census.hpp"
#include "ltq/lpoly.hpp"

using namespace ltq;

namespace {

void table(const curve_spec& c, u64 max_p) {
    std::cout << c.label << "  N = " << c.N << "  D = " << c.D << "\n";
    std::cout << std::setw(8) << "p" << std::setw(8) << "X" << std::setw(10) << "Y" << std::setw(18) << "#J" << std::setw(6) << "z"
              << "\n";
    for (u64 p = 3; p <= max_p; p += 2) {
        if (!is_prime(p)) continue;
        if (!has_good_reduction(c, p)) {
            std::cout << std::setw(8) << p << "   bad\n";
            continue;
        }
        trace_record r = lpoly(c, p);
        std::cout << std::setw(8) << p << std::setw(8) << r.X << std::setw(10) << r.Y << std::setw(18)
                  << static_cast<long long>(jacobian_order_of(r)) << std::setw(6) << z_from_record(r, c.D) << "\n";
    }
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    u64 max_p = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 50;
    try {
        if (argc > 1)
            table(builtin_curve(argv[1]), max_p);
        else
            for (const auto& c : builtin_curves()) table(c, max_p);
    } catch (const error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
