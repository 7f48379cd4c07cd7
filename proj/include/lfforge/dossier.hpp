#pragma once

#include "lfforge/filters.hpp"
#include "lfforge/pairing.hpp"
#include "lfforge/wavecorr.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <optional>

namespace lfforge::dossier {

/// x'(t) = x(t) - v0 (t - t0): positions seen from a frame moving at v0.
template <typename DerivedX, typename DerivedT>
Eigen::Array<typename DerivedX::Scalar, Eigen::Dynamic, 1> oblique_series(
    const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedT>& t,
    typename DerivedX::Scalar v0, typename DerivedX::Scalar t0) {
  if (x.size() != t.size()) throw std::invalid_argument("oblique_series: size mismatch");
  return x.derived().array() - v0 * (t.derived().array() - t0);
}

struct DossierInputs {
  const CandidatePair* base = nullptr;      ///< pair as first extracted
  const filters::PairLedger* ledger = nullptr;
  const CandidatePair* retained = nullptr;  ///< surviving window, if any
  double dt = 0.5;
  wavelet::WaveletConfig wavelet;
  std::optional<double> oblique_reference_speed;  ///< default: mean SV speed of the pair
};

/// A PairDossier document (see docs/pair_dossier.schema.json).
nlohmann::json build_dossier(const DossierInputs& in);

/// Pairs worth a human look: anything flagged, trimmed or removed.
bool is_flagged(const filters::PairLedger& ledger);

}  // namespace lfforge::dossier
