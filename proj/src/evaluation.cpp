#include "stillact/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "vendor/json.hpp"

#include "stillact/errors.hpp"
#include "stillact/geometry.hpp"
#include "stillact/rng.hpp"

namespace stillact {

namespace {

std::vector<std::size_t> ranked_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
    int best = 0;
    for (Eigen::Index j = 1; j < scores.size(); ++j) {
        if (scores(j) > scores(best)) best = static_cast<int>(j);
    }
    return best;
}

struct EncodedImage {
    FeatureVector feature;
    int label = 0;
};

/// Normalize + encode every labeled annotation; encoding failures are counted,
/// not dropped silently.
std::vector<EncodedImage> encode_all(const std::vector<ImageAnnotation>& annotations,
                                     const ThresholdSet& thresholds, int* skipped) {
    std::vector<EncodedImage> out;
    out.reserve(annotations.size());
    for (const ImageAnnotation& annotation : annotations) {
        if (!annotation.label.has_value()) {
            ++*skipped;
            continue;
        }
        try {
            ImageAnnotation normalized = normalize_scale(annotation);
            out.push_back({encode_image(normalized, thresholds), *annotation.label});
        } catch (const Error&) {
            ++*skipped;
        }
    }
    return out;
}

}  // namespace

ApDetail average_precision_detail(const std::vector<double>& scores,
                                  const std::vector<bool>& positives) {
    if (scores.size() != positives.size()) {
        throw LengthMismatch("average_precision: " + std::to_string(scores.size()) +
                             " scores vs " + std::to_string(positives.size()) + " flags");
    }

    std::vector<std::size_t> order = ranked_order(scores);

    ApDetail detail;
    double precision_sum = 0.0;
    int hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (rank > 0 && scores[order[rank]] == scores[order[rank - 1]]) ++detail.ties;
        if (positives[order[rank]]) {
            ++hits;
            precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    if (hits == 0) throw NoPositives();
    detail.ap = precision_sum / static_cast<double>(hits);
    return detail;
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& positives) {
    return average_precision_detail(scores, positives).ap;
}

double mean_average_precision(const std::vector<ApResult>& results) {
    std::array<bool, kClassCount> seen{};
    std::array<double, kClassCount> ap{};
    for (const ApResult& r : results) {
        if (r.class_id < 0 || r.class_id >= kClassCount || seen[static_cast<std::size_t>(r.class_id)]) {
            throw LengthMismatch("mean_average_precision: expected one result per class");
        }
        seen[static_cast<std::size_t>(r.class_id)] = true;
        ap[static_cast<std::size_t>(r.class_id)] = r.ap;
    }
    for (int c = 0; c < kClassCount; ++c) {
        if (!seen[static_cast<std::size_t>(c)]) throw MissingClass(c);
    }
    // Summed in class order so the mean is identical for any row order.
    double sum = 0.0;
    for (double a : ap) sum += a;
    return sum / static_cast<double>(kClassCount);
}

EvaluationReport evaluate_model(const Scorer& scorer,
                                const std::vector<ImageAnnotation>& annotations,
                                const ThresholdSet& thresholds) {
    EvaluationReport report;
    std::vector<EncodedImage> images = encode_all(annotations, thresholds, &report.skipped);
    report.evaluated = static_cast<int>(images.size());
    if (images.empty()) throw EmptyDataset();

    std::vector<Eigen::VectorXd> scores;
    scores.reserve(images.size());
    int correct = 0;
    for (const EncodedImage& image : images) {
        Eigen::VectorXd s = scorer(image.feature);
        if (s.size() != kClassCount) {
            throw DimensionMismatch("scorer returned " + std::to_string(s.size()) +
                                    " values, expected " + std::to_string(kClassCount));
        }
        if (argmax_lowest(s) == image.label) ++correct;
        scores.push_back(std::move(s));
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(images.size());

    for (int c = 0; c < kClassCount; ++c) {
        std::vector<double> class_scores(images.size());
        std::vector<bool> is_positive(images.size());
        for (std::size_t i = 0; i < images.size(); ++i) {
            class_scores[i] = scores[i](c);
            is_positive[i] = images[i].label == c;
        }
        ApDetail detail = average_precision_detail(class_scores, is_positive);
        int positives = static_cast<int>(std::count(is_positive.begin(), is_positive.end(), true));
        report.per_class.push_back(
            {c, detail.ap, positives, static_cast<int>(images.size()), detail.ties});
    }
    report.map = mean_average_precision(report.per_class);
    return report;
}

EvaluationReport evaluate_model(const DbnModel& model,
                                const std::vector<ImageAnnotation>& annotations,
                                const ThresholdSet& thresholds) {
    return evaluate_model(
        [&model](const FeatureVector& f) { return forward(model, f); }, annotations, thresholds);
}

std::string report_text(const EvaluationReport& report) {
    char line[160];
    std::string out;
    out += "class                        ap        positives  ranked  ties\n";
    for (const ApResult& r : report.per_class) {
        std::snprintf(line, sizeof(line), "%-27s  %.6f  %9d  %6d  %4d\n",
                      std::string(class_name(r.class_id)).c_str(), r.ap, r.positives, r.ranked,
                      r.ties);
        out += line;
    }
    std::snprintf(line, sizeof(line), "mAP       %.6f\naccuracy  %.6f\nevaluated %d\nskipped   %d\n",
                  report.map, report.accuracy, report.evaluated, report.skipped);
    out += line;
    return out;
}

std::string report_json(const EvaluationReport& report) {
    nlohmann::json classes = nlohmann::json::array();
    for (const ApResult& r : report.per_class) {
        classes.push_back({{"class", std::string(class_name(r.class_id))},
                           {"ap", r.ap},
                           {"support", r.positives},
                           {"ranked", r.ranked},
                           {"ties", r.ties}});
    }
    nlohmann::json doc = {{"classes", classes},
                          {"map", report.map},
                          {"accuracy", report.accuracy},
                          {"evaluated", report.evaluated},
                          {"skipped", report.skipped}};
    return doc.dump(2);
}

namespace {

/// Nearest-rank deciles D1..D9, deduplicated ascending.
std::vector<double> decile_grid(std::vector<double> samples) {
    std::vector<double> grid;
    if (samples.empty()) return grid;
    std::sort(samples.begin(), samples.end());
    for (int d = 1; d <= 9; ++d) {
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(0.1 * d * static_cast<double>(samples.size())));
        if (rank == 0) rank = 1;
        double value = samples[rank - 1];
        if (grid.empty() || value > grid.back()) grid.push_back(value);
    }
    return grid;
}

/// Stratified fold ids, one per annotation. Every class must appear in every
/// fold, otherwise per-fold AP is undefined.
std::vector<int> assign_folds(const std::vector<ImageAnnotation>& annotations, int folds,
                              std::uint64_t seed) {
    std::array<std::vector<std::size_t>, kClassCount> by_class;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        if (!annotations[i].label.has_value()) throw MissingLabel(annotations[i].image_id);
        by_class[static_cast<std::size_t>(*annotations[i].label)].push_back(i);
    }

    std::vector<int> fold_of(annotations.size(), 0);
    rng::Engine eng = rng::make_engine(seed, "thresholds.folds");
    for (int c = 0; c < kClassCount; ++c) {
        std::vector<std::size_t>& members = by_class[static_cast<std::size_t>(c)];
        if (static_cast<int>(members.size()) < folds) {
            throw InsufficientData("class '" + std::string(class_name(c)) + "' has " +
                                   std::to_string(members.size()) + " images, need >= " +
                                   std::to_string(folds) + " for " + std::to_string(folds) +
                                   "-fold selection");
        }
        for (std::size_t i = members.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(rng::uniform_int(eng, 0, static_cast<int>(i)));
            std::swap(members[i], members[j]);
        }
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
            fold_of[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
        }
    }
    return fold_of;
}

/// Mean fold mAP of one candidate threshold set.
double cross_validated_map(const std::vector<ImageAnnotation>& annotations,
                           const std::vector<int>& fold_of, int folds,
                           const FeatureTrainer& trainer, const ThresholdSet& thresholds) {
    double total = 0.0;
    for (int fold = 0; fold < folds; ++fold) {
        std::vector<FeatureVector> train_features;
        std::vector<int> train_labels;
        std::vector<ImageAnnotation> validation;
        for (std::size_t i = 0; i < annotations.size(); ++i) {
            if (fold_of[i] == fold) {
                validation.push_back(annotations[i]);
            } else {
                ImageAnnotation normalized = normalize_scale(annotations[i]);
                train_features.push_back(encode_image(normalized, thresholds));
                train_labels.push_back(*annotations[i].label);
            }
        }
        Scorer scorer = trainer(train_features, train_labels);
        total += evaluate_model(scorer, validation, thresholds).map;
    }
    return total / static_cast<double>(folds);
}

}  // namespace

ThresholdSearchResult select_thresholds(const std::vector<ImageAnnotation>& annotations,
                                        const FeatureTrainer& trainer, int folds,
                                        std::uint64_t seed) {
    if (folds < 2) throw InvalidConfig("threshold selection needs folds >= 2");
    if (annotations.empty()) throw EmptyDataset();

    std::vector<int> fold_of = assign_folds(annotations, folds, seed);

    ThresholdSearchResult result;
    result.info.resize(kEntityCount);
    for (int k = 0; k < kEntityCount; ++k) {
        EntityKind kind = entity_at(k);
        std::vector<double> observed;
        for (const ImageAnnotation& annotation : annotations) {
            for (const DetectionRecord& rec : annotation.detections) {
                if (rec.kind == kind && rec.source == Source::Detector) {
                    observed.push_back(rec.score);
                }
            }
        }
        EntityThresholdInfo& info = result.info[static_cast<std::size_t>(k)];
        info.kind = kind;
        info.grid = decile_grid(std::move(observed));
        info.vacuous = info.grid.empty();
        info.chosen = info.vacuous ? 0.0 : info.grid.front();
        result.thresholds.at(kind) = info.chosen;
    }

    double current_map = cross_validated_map(annotations, fold_of, folds, trainer,
                                             result.thresholds);

    // One greedy coordinate pass in catalog order; earliest candidate wins ties.
    for (int k = 0; k < kEntityCount; ++k) {
        EntityThresholdInfo& info = result.info[static_cast<std::size_t>(k)];
        if (info.vacuous) continue;
        ThresholdSet trial = result.thresholds;
        for (double candidate : info.grid) {
            if (candidate == info.chosen) continue;
            trial.at(info.kind) = candidate;
            double candidate_map = cross_validated_map(annotations, fold_of, folds, trainer, trial);
            if (candidate_map > current_map) {
                current_map = candidate_map;
                info.chosen = candidate;
            }
        }
        result.thresholds.at(info.kind) = info.chosen;
    }

    result.best_map = current_map;
    return result;
}

}  // namespace stillact
