// delta(T_eps) against its linear approximation, and the predicted share of
// primes with |z_p| < m/2 at x = 10^6 for D = 2 and D = 5.

#include <cstdio>

#include "ltq/satotate.hpp"

using namespace ltq;

int main() {
    std::printf("%8s %14s %14s %10s\n", "eps", "delta", "linear", "rel");
    for (double eps : {0.4, 0.2, 0.1, 0.05, 0.025, 0.0125}) {
        double d = delta_T_eps(eps), a = delta_asymptotic(eps);
        std::printf("%8.4f %14.10f %14.10f %+10.6f\n", eps, d, a, d / a - 1);
    }
    std::printf("\n%6s %14s %14s\n", "m", "D = 2", "D = 5");
    delta_cache cache;
    for (u64 m : {1u, 10u, 100u, 1000u})
        std::printf("%6llu %14.8f %14.8f\n", static_cast<unsigned long long>(m), predicted_Pm_inf(m, 2, 1000000, pm_mode::sum, cache),
                    predicted_Pm_inf(m, 5, 1000000, pm_mode::sum, cache));
}
