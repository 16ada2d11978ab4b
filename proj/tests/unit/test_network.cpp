#include "advaudio/network.hpp"
#include "advaudio/rng.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace advaudio;

namespace {

Architecture small_arch()
{
    Architecture a;
    a.input_rows = 12;
    a.input_cols = 7;
    a.conv_filters = 3;
    a.hidden = 6;
    a.num_classes = 4;
    return a;
}

Network random_network(std::uint64_t seed)
{
    Network net(small_arch());
    net.initialize(seed);
    Rng rng(seed + 100);
    // Nonzero biases and a non-trivial standardization so every path is exercised.
    for (std::size_t slot : {Network::ConvBias, Network::HiddenBias, Network::OutputBias}) {
        for (double& v : net.params()[slot].data) {
            v = rng.uniform(-0.1, 0.1);
        }
    }
    for (double& v : net.input_mean()) {
        v = rng.uniform(-0.5, 0.5);
    }
    for (double& v : net.input_scale()) {
        v = rng.uniform(0.5, 2.0);
    }
    return net;
}

std::vector<double> random_features(Rng& rng, const Architecture& a)
{
    std::vector<double> x(a.input_rows * a.input_cols);
    for (double& v : x) {
        v = rng.normal();
    }
    return x;
}

double loss(const Network& net, const std::vector<double>& x, std::size_t label)
{
    return -std::log(net.probabilities(x)[label]);
}

} // namespace

TEST(Network, DerivedDimensions)
{
    const Architecture a = small_arch();
    EXPECT_EQ(a.conv_rows(), 10u);
    EXPECT_EQ(a.conv_cols(), 5u);
    EXPECT_EQ(a.pool_rows(), 5u);
    EXPECT_EQ(a.pool_cols(), 2u);
    EXPECT_EQ(a.flat_size(), 30u);

    Architecture bad = a;
    bad.input_cols = 2;
    EXPECT_ERROR_CODE(bad.validate(), ErrorCode::ModelShapeMismatch);
}

TEST(Network, SoftmaxAndArgmax)
{
    const std::vector<double> logits = {1.0, 0.0};
    const auto p = softmax(logits);
    EXPECT_NEAR(p[0], std::exp(1.0) / (std::exp(1.0) + 1.0), 1e-15);
    const std::vector<double> huge = {1000.0, 999.0, -1000.0};
    const auto q = softmax(huge);
    EXPECT_TRUE(std::isfinite(q[0]));
    EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
    const std::vector<double> tie = {0.3, 0.5, 0.5};
    EXPECT_EQ(argmax(tie), 1u);
}

TEST(Network, ProbabilitiesSumToOne)
{
    const Network net = random_network(1);
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        const auto p = net.probabilities(random_features(rng, net.architecture()));
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(Network, ShapeCheckCatchesWrongTensor)
{
    Network net = random_network(1);
    net.check_shapes();
    net.params()[Network::HiddenWeight].data.pop_back();
    EXPECT_ERROR_CODE(net.check_shapes(), ErrorCode::ModelShapeMismatch);
}

TEST(Network, InitializeIsDeterministic)
{
    EXPECT_EQ(random_network(9).params()[Network::ConvWeight].data,
              random_network(9).params()[Network::ConvWeight].data);
    EXPECT_NE(random_network(9).params()[Network::ConvWeight].data,
              random_network(10).params()[Network::ConvWeight].data);
}

// Analytic gradients against central finite differences of the loss, 50
// random coordinates per parameter tensor (every coordinate when the tensor is
// smaller than that).
TEST(Network, GradientMatchesFiniteDifferences)
{
    constexpr double kStep = 1e-5;
    constexpr double kTolerance = 1e-4;
    constexpr std::size_t kProbes = 50;

    Network net = random_network(3);
    Rng rng(4);
    const auto x = random_features(rng, net.architecture());
    const std::size_t label = 2;

    auto grad = net.zero_like_params();
    const double l0 = net.accumulate_gradient(x, label, grad);
    EXPECT_NEAR(l0, loss(net, x, label), 1e-12);

    for (std::size_t slot = 0; slot < Network::kNumSlots; ++slot) {
        const std::size_t n = net.params()[slot].data.size();
        double worst = 0.0;
        for (std::size_t probe = 0; probe < std::min(n, kProbes); ++probe) {
            const std::size_t i = n <= kProbes ? probe : rng.uniform_below(n);
            double& w = net.params()[slot].data[i];
            const double saved = w;
            w = saved + kStep;
            const double up = loss(net, x, label);
            w = saved - kStep;
            const double down = loss(net, x, label);
            w = saved;
            const double numeric = (up - down) / (2.0 * kStep);
            const double analytic = grad[slot].data[i];
            const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            worst = std::max(worst, rel);
        }
        EXPECT_LE(worst, kTolerance) << net.params()[slot].name;
    }
}

TEST(Network, GradientAccumulates)
{
    const Network net = random_network(5);
    Rng rng(6);
    const auto x = random_features(rng, net.architecture());
    auto once = net.zero_like_params();
    net.accumulate_gradient(x, 1, once);
    auto twice = net.zero_like_params();
    net.accumulate_gradient(x, 1, twice);
    net.accumulate_gradient(x, 1, twice);
    for (std::size_t s = 0; s < once.size(); ++s) {
        for (std::size_t i = 0; i < once[s].data.size(); ++i) {
            ASSERT_NEAR(twice[s].data[i], 2.0 * once[s].data[i], 1e-12);
        }
    }
}
