#pragma once
// Classifiers and the experiment harness: k-fold cross-validation, accuracy
// grids over (train day x test day), and confusion matrices for the three
// train/test window pairings.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rffp/analysis.hpp"
#include "rffp/capture.hpp"
#include "rffp/nn.hpp"

#include <json.hpp>

namespace rffp {

// E1 trains on stabilized captures and tests on warm-up captures; E2 stays
// on stabilized captures; E3 stays on warm-up captures.
enum class Scenario { e1_train12_test1, e2_train12_test12, e3_train1_test1 };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct FoldPair {
    std::vector<std::size_t> train;  // indices into the example set
    std::vector<std::size_t> test;
};

// Stratified k-fold: per-label shuffles dealt round-robin with a fold cursor
// carried across labels, so fold sizes stay equal within 1 globally.
std::vector<FoldPair> kfold_split(const std::vector<LabeledExample>& examples, int k,
                                  std::uint64_t seed);

struct Confusion {
    int num_classes = 0;
    std::vector<long long> counts;  // row = true class, column = predicted

    long long& at(int truth, int pred) { return counts[truth * num_classes + pred]; }
    long long at(int truth, int pred) const { return counts[truth * num_classes + pred]; }
};

struct EvalResult {
    double accuracy = 0.0;
    Confusion confusion;
};

// Argmax prediction, ties broken toward the lowest class index (class order
// is ascending device_id, so toward the lowest device_id).
EvalResult evaluate_cnn(const CnnModel& model, const std::vector<const float*>& inputs,
                        const std::vector<int>& labels, double input_scale);

// Diagnostic baseline that classifies on three per-frame scalars: squaring
// CFO estimate, hump rate, and envelope-spectrum peak frequency. Isolates
// how much of the fingerprint is plain CFO.
struct CentroidModel {
    std::vector<int> device_ids;                  // ascending; defines class order
    std::vector<std::array<double, 3>> centroids; // one per class
};

std::array<double, 3> centroid_features(const IqFrame& frame, const AnalysisConfig& cfg = {});
CentroidModel train_centroid(const std::vector<IqFrame>& frames, const AnalysisConfig& cfg = {});
EvalResult evaluate_centroid(const CentroidModel& model, const std::vector<IqFrame>& frames,
                             const AnalysisConfig& cfg = {});

struct ExperimentConfig {
    int window_width = 2048;
    bool all_windows = false;  // default: first window of each frame
    int kfold = 5;
    TrainHyper hyper;          // epochs 30, batch 16, lr 0.1, momentum 0.9
    std::uint64_t seed = 42;
    std::string stable_window = "min12";
    std::string warmup_window = "min1";
};

struct CellResult {
    int train_day = 0;
    int test_day = 0;
    double accuracy = 0.0;
    Confusion confusion;
    std::vector<double> fold_accuracies;  // nonempty only for same-cell CV
};

struct ExperimentReport {
    Scenario scenario = Scenario::e2_train12_test12;
    std::string train_window;
    std::string test_window;
    std::vector<int> days;
    std::vector<int> device_ids;
    int window_width = 0;
    std::vector<std::vector<double>> accuracy_grid;  // [train day][test day]
    std::vector<CellResult> cells;                   // row-major over the grid
};

// One container per day, each holding both capture windows. Same-(day,window)
// cells use k-fold CV; cross cells train on the full train cell. Models are
// trained once per train day and reused across test days.
ExperimentReport run_experiment(Scenario scenario,
                                const std::vector<DatasetContainer>& datasets_per_day,
                                const ExperimentConfig& config);

nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const std::string& version,
                                      const std::string& config_hash);

// Confusion matrix as CSV with device-id row/column headers.
std::string confusion_to_csv(const Confusion& confusion, const std::vector<int>& device_ids);

}
