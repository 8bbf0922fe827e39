#include "mrct/mrct.hpp"

#include "mrct/detail/fit_engine.hpp"

namespace mrct {

EigenSystem eigensystem(const FunctionalSample& sample, const SubsetH& H, double rank_tol) {
    if (H.n() != sample.n()) throw DimensionError("eigensystem: subset built for another sample");
    return detail::decompose(detail::DataView{sample.values}, H, rank_tol);
}

Eigen::VectorXd standardized_distances(const FunctionalSample& sample, const EigenSystem& eig,
                                       double a) {
    return detail::spectral_distances(detail::DataView{sample.values}, eig,
                                      a);
}

KSolve solve_k(const FunctionalSample& sample, const EigenSystem& eig, double alpha,
               const ChiSqDraws& draws, const MrctConfig& cfg) {
    return detail::solve_k_view(detail::DataView{sample.values}, eig, alpha,
                                draws, cfg);
}

CStep c_step(const FunctionalSample& sample, const SubsetH& h0, double alpha,
             const MrctConfig& cfg, const ChiSqDraws& draws) {
    if (h0.n() != sample.n()) throw DimensionError("c_step: subset built for another sample");
    return detail::c_step_view(detail::DataView{sample.values}, h0, alpha,
                               cfg, draws);
}

MrctResult mrct_fit(const FunctionalSample& sample, const MrctConfig& cfg) {
    return detail::fit_view(detail::DataView{sample.values}, cfg);
}

double cutoff(const EigenSystem& eig_final, double alpha, double q, std::uint64_t seed,
              int mc_n) {
    if (!(alpha > 0.0)) throw DomainError("cutoff: alpha must be positive");
    if (!(eig_final.k > 0.0)) throw DomainError("cutoff: eigensystem carries a nonpositive k");
    // Corollary-style weights on the robust eigenvalue estimates k * lambda.
    const Eigen::ArrayXd robust = eig_final.k * eig_final.eigvals.array();
    const Eigen::VectorXd weights = (robust / (robust + alpha)).square().matrix();
    const ChiSqDraws draws = draw_chisq(mc_n, eig_final.rank, seed);
    return wchisq_quantile(weights, q, draws);
}

std::vector<bool> flag_outliers(const Eigen::Ref<const Eigen::VectorXd>& distances, double cut) {
    if (!(cut > 0.0)) throw DomainError("flag_outliers: cutoff must be positive");
    std::vector<bool> flags(distances.size());
    for (Eigen::Index i = 0; i < distances.size(); ++i) flags[i] = distances[i] > cut;
    return flags;
}

}  // namespace mrct
