// Gradient of the middle pair of a 4-variable chain whose outer pairs already
// explain the observed values. The plain pseudo-likelihood gives that pair no
// signal; masking the outer neighbours restores it.

#include <cstdio>

#include "cfnlearn/losses.hpp"

using namespace cfnlearn;

int main() {
    auto net = CostFunctionNetwork::uniform(4, 2);
    net.set_pair(0, 1, {{20, 0}, {0, 20}});
    net.pair(1, 2);
    net.set_pair(2, 3, {{20, 0}, {0, 20}});
    const Assignment y{0, 1, 1, 0};
    const auto slot = static_cast<std::size_t>(net.pair_slot(1, 2));

    MaskPlan plan = MaskPlan::none(4);
    plan.excluded[1] = {0};
    plan.excluded[2] = {3};

    const auto plain = npll(net, y).grad_pairs[slot];
    const auto masked = e_npll(net, y, plan).grad_pairs[slot];
    std::printf("gradient on pair (1,2)    npll        e-npll\n");
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) std::printf("  entry (%d,%d)          % .2e   % .2e\n", a, b, plain(a, b), masked(a, b));
}
