#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eqed/effective_model.hpp"
#include "eqed/ensemble_matrix.hpp"
#include "eqed/geometry.hpp"
#include "eqed/spectra.hpp"

namespace eqed {

/// Overlap of every mode with the uniform vector x_S = (1,...,1)/sqrt(N).
/// `amplitude` is |x_S^dag x| / |x|, `squared` its square; both lie in [0, 1].
struct SymmetricOverlap {
  std::vector<double> amplitude;
  std::vector<double> squared;
  std::size_t argmax = 0;
};

/// Throws NumericalFailure on a flagged mode set.
SymmetricOverlap symmetric_overlap(const ModeSet& modes);

struct ModeEntry {
  std::size_t mode = 0;
  cplx eigenvalue;
  double delta_g = 0.0;
  double overlap = 0.0;          // amplitude metric
  double overlap_squared = 0.0;
};

/// Modes ranked by |delta_g| (largest first).
struct ModeReport {
  std::vector<ModeEntry> ranked;
  double completeness_residual = 0.0;
  const ModeEntry& dominant() const { return ranked.front(); }
};

ModeReport mode_report(const CouplingSystem& system, const ModeSet& modes);

struct CampaignOutputs {
  bool avg_spectrum = true;
  bool per_realization_spectra = false;
  bool geff_histogram = true;
  bool mode_report = false;
  /// Adiabaticity grade per realization (needs the eigenvalues of M).
  bool grade = true;
};

struct Campaign {
  EmitterLayout base;
  DisorderSpec disorder;
  BareParameters bare;
  SweepGrid grid;
  CampaignOutputs outputs;
  /// Fixed bin count for the histogram; 0 selects Freedman-Diaconis.
  int histogram_bins = 0;

  void validate() const;
};

struct RealizationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double g_A_eff = 0.0;
  double delta_g = 0.0;
  double P_B = 0.0;  // one-photon estimate g^T (M M^dag)^{-1} g
  std::optional<AdiabaticityGrade> grade;
  double min_abs_eigenvalue = 0.0;
  std::optional<double> half_splitting;
  std::vector<double> T_c;  // on the campaign grid when spectra are requested
  std::optional<ModeReport> modes;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Freedman-Diaconis when bins == 0 (one bin if the spread vanishes).
Histogram make_histogram(const std::vector<double>& values, int bins = 0);

struct CampaignResult {
  std::vector<RealizationRecord> records;  // by realization index
  std::vector<double> grid;
  std::vector<double> average_T_c;  // empty unless spectra were computed
  std::vector<std::size_t> order_by_population;  // successful indices, increasing P_B
  std::optional<Histogram> histogram;
  std::size_t failures = 0;

  std::vector<double> g_eff_values() const;
  std::vector<double> populations() const;
};

/// Realization i uses the disorder seed derive_seed(campaign seed, i). The
/// average is summed in index order. Throws NumericalFailure when more than
/// half of the realizations fail.
CampaignResult run_campaign(const Campaign& campaign);

/// Mean of `values[i]` rows in index order; used for the averaged spectrum.
std::vector<double> ordered_mean(const std::vector<std::vector<double>>& rows);

struct SmallWReport {
  double delta_g_zero = 0.0;
  double mean_delta_g = 0.0;
  double relative_deviation = 0.0;
  /// Coefficient c of mean(delta_g)(W) - delta_g(0) = c W^2 when several
  /// strengths are supplied; absent otherwise.
  std::optional<double> quadratic_coefficient;
  std::vector<std::string> warnings;
};

/// Compares campaign-averaged delta_g with the single-mode value
/// -Re(g^T x_S x_S^T v) / lambda_S at W = 0.
SmallWReport small_W_consistency(const std::vector<CampaignResult>& campaigns, const std::vector<double>& strengths,
                                 double delta_g_zero, cplx lambda_S);
SmallWReport small_W_consistency(const CampaignResult& campaign, double strength, double delta_g_zero,
                                 cplx lambda_S);

/// Output directory: manifest.json, average.csv, histogram.csv (bin_left,
/// bin_right, count), realizations.csv and realization_<i>.csv when requested.
void write_campaign(const std::filesystem::path& dir, const Campaign& campaign, const CampaignResult& result);

}  // namespace eqed
