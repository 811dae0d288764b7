#include "gridflow/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "gridflow/kernels.hpp"

namespace gridflow {

namespace {
constexpr std::uint64_t kCheckpointMagic = 0x31544b43'574c4647ULL;  // "GFLWCKT1"

void check_finite(const Observation& obs) {
    for (double x : obs)
        if (!std::isfinite(x)) throw std::invalid_argument("policy: non-finite observation");
}

void softmax3(const double* logits, double* probs) {
    const double m = std::max(logits[0], std::max(logits[1], logits[2]));
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (int i = 0; i < 3; ++i) probs[i] /= sum;
}

}  // namespace

PolicyNet::PolicyNet() : theta_(param_count(), 0.0) {}

void PolicyNet::init(Rng& rng) {
    auto glorot = [&rng, this](int offset, int rows, int cols) {
        const double limit = std::sqrt(6.0 / (rows + cols));
        for (int i = 0; i < rows * cols; ++i) theta_[offset + i] = rng.uniform(-limit, limit);
    };
    std::fill(theta_.begin(), theta_.end(), 0.0);
    glorot(w1_, kHidden, kObsDim);
    glorot(w2_, kHidden, kHidden);
    // Output layer starts at zero: the initial policy is uniform over the
    // action set in every state, which removes arbitrary initial action
    // preferences and is the usual starting point for policy gradients.
    update_index = 0;
}

std::array<double, kActions> PolicyNet::forward_with_cache(
    const Observation& obs, std::array<double, kHidden>& h1,
    std::array<double, kHidden>& h2) const {
    check_finite(obs);
    const double* t = theta_.data();
    kernels::matvec_bias(t + w1_, t + b1_, obs.data(), h1.data(), kHidden, kObsDim);
    for (double& v : h1) v = std::tanh(v);
    kernels::matvec_bias(t + w2_, t + b2_, h1.data(), h2.data(), kHidden, kHidden);
    for (double& v : h2) v = std::tanh(v);
    std::array<double, kActions> logits;
    kernels::matvec_bias(t + w3_, t + b3_, h2.data(), logits.data(), kActions, kHidden);
    std::array<double, kActions> probs;
    softmax3(logits.data(), probs.data());
    return probs;
}

std::array<double, kActions> PolicyNet::forward(const Observation& obs) const {
    std::array<double, kHidden> h1, h2;
    return forward_with_cache(obs, h1, h2);
}

void PolicyNet::accumulate_logprob_grad(const Observation& obs, int action, double coeff,
                                        std::span<double> grad) const {
    if (action < 0 || action >= kActions)
        throw std::invalid_argument("policy: action index out of range");
    if (grad.size() != static_cast<std::size_t>(param_count()))
        throw std::invalid_argument("policy: gradient size mismatch");

    std::array<double, kHidden> h1, h2;
    const auto probs = forward_with_cache(obs, h1, h2);

    // Output layer error for log softmax: onehot(action) - probs.
    std::array<double, kActions> d3;
    for (int i = 0; i < kActions; ++i) d3[i] = (i == action ? 1.0 : 0.0) - probs[i];

    double* g = grad.data();
    const double* t = theta_.data();
    kernels::rank1_update(g + w3_, d3.data(), h2.data(), coeff, kActions, kHidden);
    kernels::axpy(g + b3_, d3.data(), coeff, kActions);

    std::array<double, kHidden> e2, d2;
    kernels::matvec_t(t + w3_, d3.data(), e2.data(), kActions, kHidden);
    for (int i = 0; i < kHidden; ++i) d2[i] = e2[i] * (1.0 - h2[i] * h2[i]);
    kernels::rank1_update(g + w2_, d2.data(), h1.data(), coeff, kHidden, kHidden);
    kernels::axpy(g + b2_, d2.data(), coeff, kHidden);

    std::array<double, kHidden> e1, d1;
    kernels::matvec_t(t + w2_, d2.data(), e1.data(), kHidden, kHidden);
    for (int i = 0; i < kHidden; ++i) d1[i] = e1[i] * (1.0 - h1[i] * h1[i]);
    kernels::rank1_update(g + w1_, d1.data(), obs.data(), coeff, kHidden, kObsDim);
    kernels::axpy(g + b1_, d1.data(), coeff, kHidden);
}

void PolicyNet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const std::uint32_t dims[4] = {kObsDim, kHidden, kHidden, kActions};
    out.write(reinterpret_cast<const char*>(&kCheckpointMagic), sizeof(kCheckpointMagic));
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(&update_index), sizeof(update_index));
    out.write(reinterpret_cast<const char*>(theta_.data()),
              static_cast<std::streamsize>(theta_.size() * sizeof(double)));
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

PolicyNet PolicyNet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::uint64_t magic = 0;
    std::uint32_t dims[4] = {0, 0, 0, 0};
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    if (magic != kCheckpointMagic)
        throw std::runtime_error("not a policy checkpoint: " + path);
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (dims[0] != kObsDim || dims[1] != kHidden || dims[2] != kHidden || dims[3] != kActions)
        throw std::runtime_error("checkpoint layer shapes do not match this build: " + path);
    PolicyNet net;
    in.read(reinterpret_cast<char*>(&net.update_index), sizeof(net.update_index));
    in.read(reinterpret_cast<char*>(net.theta_.data()),
            static_cast<std::streamsize>(net.theta_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return net;
}

void RmsProp::update(std::vector<double>& theta, std::span<const double> grad) {
    if (theta.size() != cache.size() || grad.size() != cache.size())
        throw std::invalid_argument("rmsprop: shape mismatch");
    kernels::rmsprop_step(theta.data(), cache.data(), grad.data(), alpha, rho, eps,
                          static_cast<int>(cache.size()));
}

}  // namespace gridflow
