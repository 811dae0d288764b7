#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridflow/observation.hpp"
#include "gridflow/rng.hpp"

namespace gridflow {

inline constexpr int kHidden = 64;
inline constexpr int kActions = 3;

// Shared per-vehicle policy: obs(22) -> tanh(64) -> tanh(64) -> softmax(3).
// Parameters live in one flat vector (W1, b1, W2, b2, W3, b3) so the
// optimizer, checkpointing and finite-difference checks can treat them
// uniformly.
class PolicyNet {
public:
    PolicyNet();

    static constexpr int param_count() {
        return kHidden * kObsDim + kHidden + kHidden * kHidden + kHidden +
               kActions * kHidden + kActions;
    }

    std::vector<double>& params() { return theta_; }
    const std::vector<double>& params() const { return theta_; }
    std::uint64_t update_index = 0;

    // Glorot-uniform weights, zero biases.
    void init(Rng& rng);

    std::array<double, kActions> forward(const Observation& obs) const;

    // grad += coeff * d/dtheta log pi(action | obs). grad must have
    // param_count() entries.
    void accumulate_logprob_grad(const Observation& obs, int action, double coeff,
                                 std::span<double> grad) const;

    std::array<double, kActions> forward_with_cache(const Observation& obs,
                                                    std::array<double, kHidden>& h1,
                                                    std::array<double, kHidden>& h2) const;

    void save(const std::string& path) const;
    static PolicyNet load(const std::string& path);

private:
    std::vector<double> theta_;

    // flat-vector offsets
    static constexpr int w1_ = 0;
    static constexpr int b1_ = w1_ + kHidden * kObsDim;
    static constexpr int w2_ = b1_ + kHidden;
    static constexpr int b2_ = w2_ + kHidden * kHidden;
    static constexpr int w3_ = b2_ + kHidden;
    static constexpr int b3_ = w3_ + kActions * kHidden;
};

// RMSprop state and ascent step: cache <- rho*cache + (1-rho) g^2,
// theta <- theta + alpha * g / (sqrt(cache) + eps).
struct RmsProp {
    double alpha = 0.001;
    double rho = 0.99;
    double eps = 1e-8;
    std::vector<double> cache;

    explicit RmsProp(int n_params, double alpha_ = 0.001)
        : alpha(alpha_), cache(static_cast<std::size_t>(n_params), 0.0) {}

    void update(std::vector<double>& theta, std::span<const double> grad);
};

}  // namespace gridflow
