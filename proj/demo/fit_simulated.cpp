// Simulate one Model-3 dataset, tune aMCR by BIC and compare against SEP.

#include <cstdio>

#include <mcreg/mcreg.hpp>

int main()
{
    using namespace mcreg;
    ModelSpec spec = model_presets()[2];
    spec.seed = 7;
    const SimulatedData sim = gen_dataset(spec);
    const Dataset& d = sim.data;
    const SolverConfig cfg;
    const TuningGrid grid = default_grid();

    const InitialFit init = tune_initial_separate(d.X, d.Y, grid.lambda1_values, cfg);
    const McrTuning tuned = tune_mcr(d.X, d.Y, init, grid, cfg);
    const PrecisionPattern pattern = symmetrize_pattern(tuned.fit.Gamma, PresenceRule::Or);
    const SepFit sep = tune_sep(d.X, d.Y, grid.lambda1_values, grid.lambda2_values, cfg, PresenceRule::Or);

    const auto show = [&](const char* name, const CoefMatrix& B, const PrecisionPattern& p) {
        const EstimationReport e = estimation_errors(B, sim.truth.B_star);
        const SelectionReport sb = coefficient_selection(B, sim.truth.B_star);
        const SelectionReport so = precision_selection(p, sim.truth.Omega_star);
        std::printf("%-5s |dB|_F %.3f  Mcc_B %.3f  Spe_O %.3f  Sen_O %.3f  edges %zu\n", name, e.frob, sb.mcc,
                    so.spe, so.sen, p.edge_count());
    };
    std::printf("aMCR picked lambda1 = %g, lambda2 = %g\n", tuned.fit.lambda1, tuned.fit.lambda2);
    show("aMCR", tuned.fit.B, pattern);
    show("SEP", sep.B, sep.pattern);
    std::printf("\n%s", pattern_to_dot(pattern).c_str());
}
