// Minimal library walk-through: simulate one study, run the jackstraw,
// and report how many rows pass a 5% FDR threshold.
#include <algorithm>
#include <iostream>

#include <jackstraw/jackstraw.hpp>

int main() {
    jackstraw::sim::ScenarioConfig scenario;
    scenario.m = 500;
    scenario.pi0 = 0.9;
    const auto study = jackstraw::sim::generate_study(scenario, 0);

    auto config = jackstraw::default_config(study.y.rows(), {}, 42);
    config.s = 50;
    config.b = 100;
    const auto result = jackstraw::run_jackstraw(study.y, config);
    const auto fdr = jackstraw::fdr(result.p_values);

    std::size_t hits = 0;
    std::size_t true_hits = 0;
    for (std::size_t i = 0; i < fdr.q_values.size(); ++i) {
        if (fdr.q_values[i] <= 0.05) {
            ++hits;
            if (!study.true_null_mask[i]) ++true_hits;
        }
    }
    std::cout << "pi0 estimate: " << fdr.pi0_hat << '\n'
              << "rows with q <= 0.05: " << hits << " (" << true_hits << " truly associated)\n";
    return 0;
}
