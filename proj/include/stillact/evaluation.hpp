#ifndef STILLACT_EVALUATION_HPP
#define STILLACT_EVALUATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stillact/annotation.hpp"
#include "stillact/dbn.hpp"
#include "stillact/thresholds.hpp"

namespace stillact {

struct ApResult {
    int class_id = 0;
    double ap = 0.0;
    int positives = 0;
    int ranked = 0;
    int ties = 0;  // adjacent equal-score pairs in the ranking
};

/// AP = mean over positives of precision at their rank, after a stable
/// descending sort by score (ties keep input order).
double average_precision(const std::vector<double>& scores, const std::vector<bool>& positives);

struct ApDetail {
    double ap = 0.0;
    int ties = 0;
};
ApDetail average_precision_detail(const std::vector<double>& scores,
                                  const std::vector<bool>& positives);

/// Unweighted mean over exactly one ApResult per class.
double mean_average_precision(const std::vector<ApResult>& results);

struct EvaluationReport {
    std::vector<ApResult> per_class;  // kClassCount rows in class order
    double map = 0.0;
    double accuracy = 0.0;
    int evaluated = 0;
    int skipped = 0;  // images whose encoding failed; never silently dropped
};

/// Anything that maps an encoded image to per-class scores.
using Scorer = std::function<Eigen::VectorXd(const FeatureVector&)>;

/// Normalizes and encodes each annotation, ranks every class by the scorer's
/// output, and builds the per-class AP report plus argmax accuracy.
EvaluationReport evaluate_model(const Scorer& scorer,
                                const std::vector<ImageAnnotation>& annotations,
                                const ThresholdSet& thresholds);
EvaluationReport evaluate_model(const DbnModel& model,
                                const std::vector<ImageAnnotation>& annotations,
                                const ThresholdSet& thresholds);

std::string report_text(const EvaluationReport& report);
std::string report_json(const EvaluationReport& report);

/// Builds a scorer from labeled encoded features; must be deterministic.
using FeatureTrainer =
    std::function<Scorer(const std::vector<FeatureVector>&, const std::vector<int>&)>;

struct EntityThresholdInfo {
    EntityKind kind = EntityKind::Head;
    double chosen = 0.0;
    bool vacuous = false;  // no detector-source score observed anywhere
    std::vector<double> grid;
};

struct ThresholdSearchResult {
    ThresholdSet thresholds;
    std::vector<EntityThresholdInfo> info;  // one per entity, catalog order
    double best_map = 0.0;                  // mean cross-validated mAP at the final thresholds
};

/// Cross-validated per-entity threshold selection. Candidate grid per entity:
/// the deciles (D1..D9, nearest-rank) of its observed detector scores. One
/// greedy pass over entities in catalog order, all thresholds initialized to
/// their lowest decile; candidates scored by mean fold mAP with stratified
/// folds. Entities with no detector scores keep the 0 sentinel and are
/// flagged vacuous.
ThresholdSearchResult select_thresholds(const std::vector<ImageAnnotation>& annotations,
                                        const FeatureTrainer& trainer, int folds,
                                        std::uint64_t seed);

}  // namespace stillact

#endif
