#include "vortexlab/rng.h"

#include "vortexlab/geometry.h"

#include <cmath>

namespace vortexlab {

Field random_smooth_field(const Surface& g, CounterRng& rng, double amplitude) {
    const int n = g.npts();
    Field u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.next_double() - 0.5;
    double m = g.mean(u);
    for (int i = 0; i < n; ++i) u[i] -= m;
    // Low-pass: four applications of (Delta0 + sigma)^-1 leave a spectrally
    // smooth field dominated by the first few modes.
    const double sigma = 30.0 / g.volume;
    Field v;
    for (int pass = 0; pass < 4; ++pass) {
        g.shifted_solve(u, sigma, v);
        u.swap(v);
    }
    m = g.mean(u);
    for (int i = 0; i < n; ++i) u[i] -= m;
    double sup = 0.0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, std::fabs(u[i]));
    if (sup > 0.0)
        for (int i = 0; i < n; ++i) u[i] *= amplitude / sup;
    return u;
}

}  // namespace vortexlab
