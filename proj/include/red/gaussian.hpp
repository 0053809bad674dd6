#ifndef RED_GAUSSIAN_HPP
#define RED_GAUSSIAN_HPP

#include <cmath>
#include <string>
#include <vector>

#include "red/errors.hpp"

namespace red::socialint {

// Keeps degenerate variances from blowing up the KL terms.
inline constexpr double kSigmaFloor = 1e-6;

struct GaussianEmbedding {
    std::vector<double> mu;
    std::vector<double> sigma;  // component std-devs, all >= kSigmaFloor
};

inline void clamp_sigma(GaussianEmbedding& g) {
    for (double& s : g.sigma)
        if (!(s >= kSigmaFloor)) s = kSigmaFloor;
}

// KL(p || q) for diagonal Gaussians:
//   1/2 * sum_d [ sp^2/sq^2 + (mq - mp)^2/sq^2 - 1 + ln(sq^2/sp^2) ]
inline double kl_divergence(const GaussianEmbedding& p, const GaussianEmbedding& q) {
    if (p.mu.size() != q.mu.size() || p.sigma.size() != q.sigma.size() ||
        p.mu.size() != p.sigma.size())
        throw DimMismatch("gaussian dims differ");
    double sum = 0.0;
    for (size_t d = 0; d < p.mu.size(); ++d) {
        double vp = p.sigma[d] * p.sigma[d];
        double vq = q.sigma[d] * q.sigma[d];
        double dm = q.mu[d] - p.mu[d];
        sum += vp / vq + dm * dm / vq - 1.0 + std::log(vq / vp);
    }
    return 0.5 * sum;
}

// Both directions computed and summed, so symmetry holds exactly.
inline double sym_kl(const GaussianEmbedding& a, const GaussianEmbedding& b) {
    return kl_divergence(a, b) + kl_divergence(b, a);
}

}  // namespace red::socialint

#endif  // RED_GAUSSIAN_HPP
