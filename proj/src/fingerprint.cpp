#include "rffp/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "rffp/errors.hpp"
#include "rffp/phy80211b.hpp"
#include "rffp/rng.hpp"

namespace rffp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

int argmax_lowest(const std::vector<double>& scores) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(scores.size()); ++j)
        if (scores[j] > scores[best]) best = j;
    return best;
}

EvalResult tally(const std::vector<int>& labels, const std::vector<int>& predictions,
                 int num_classes) {
    EvalResult r;
    r.confusion.num_classes = num_classes;
    r.confusion.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    long long correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw DataError("label " + std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(num_classes) + ")");
        r.confusion.at(labels[i], predictions[i]) += 1;
        if (labels[i] == predictions[i]) ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    return r;
}

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::e1_train12_test1: return "e1";
        case Scenario::e2_train12_test12: return "e2";
        case Scenario::e3_train1_test1: return "e3";
    }
    throw DomainError("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "e1") return Scenario::e1_train12_test1;
    if (name == "e2") return Scenario::e2_train12_test12;
    if (name == "e3") return Scenario::e3_train1_test1;
    throw ConfigError("unknown scenario '" + name + "' (expected e1, e2, or e3)");
}

std::vector<FoldPair> kfold_split(const std::vector<LabeledExample>& examples, int k,
                                  std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold requires k >= 2");
    if (examples.empty()) throw ConfigError("k-fold requires a nonempty example set");

    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < examples.size(); ++i)
        by_label[examples[i].label].push_back(i);
    for (const auto& [label, idx] : by_label)
        if (static_cast<int>(idx.size()) < k)
            throw ConfigError("label " + std::to_string(label) + " has only " +
                              std::to_string(idx.size()) + " examples for " +
                              std::to_string(k) + "-fold");

    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t cursor = 0;
    for (auto& [label, idx] : by_label) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
        rng.shuffle(idx);
        for (std::size_t i : idx) {
            folds[cursor % k].push_back(i);
            ++cursor;
        }
    }

    std::vector<FoldPair> out(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        out[f].test = folds[f];
        std::sort(out[f].test.begin(), out[f].test.end());
        for (int g = 0; g < k; ++g)
            if (g != f)
                out[f].train.insert(out[f].train.end(), folds[g].begin(), folds[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
    }
    return out;
}

EvalResult evaluate_cnn(const CnnModel& model, const std::vector<const float*>& inputs,
                        const std::vector<int>& labels, double input_scale) {
    if (inputs.empty() || inputs.size() != labels.size())
        throw DomainError("test inputs and labels must be nonempty and aligned");
    std::vector<int> predictions(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i)
        predictions[i] = argmax_lowest(cnn_forward(model, inputs[i], input_scale));
    return tally(labels, predictions, model.num_classes);
}

std::array<double, 3> centroid_features(const IqFrame& frame, const AnalysisConfig& cfg) {
    const CfoEstimate est = estimate_cfo(frame, cfg);

    std::vector<double> re(frame.samples.size());
    for (std::size_t i = 0; i < frame.samples.size(); ++i) re[i] = frame.samples[i].real();
    const double window_s = cfg.envelope_window_chips / kChipRateHz;
    const EnvelopeTrace env = upper_envelope(re, frame.sample_rate_hz, window_s, 'I');
    const HumpReport humps = count_humps(env, cfg.prominence_rel, 1.0 / (8.0 * est.valid_range_hz));

    // Envelope-spectrum peak via per-bin Goertzel-style projection at the
    // trace's natural resolution, capped at 120 kHz.
    const std::size_t n = env.values.size();
    const double duration = static_cast<double>(n) / env.sample_rate_hz;
    const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) /
                        static_cast<double>(n);
    const std::size_t kmax = std::min<std::size_t>(n / 2, static_cast<std::size_t>(120e3 * duration));
    double best_mag = -1.0;
    double peak_hz = 0.0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        double sre = 0.0, sim = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = env.values[i] - mean;
            sre += v * std::cos(w * static_cast<double>(i));
            sim -= v * std::sin(w * static_cast<double>(i));
        }
        const double mag = sre * sre + sim * sim;
        if (mag > best_mag) {
            best_mag = mag;
            peak_hz = static_cast<double>(k) / duration;
        }
    }
    return {est.cfo_hz, humps.hump_rate_hz, peak_hz};
}

CentroidModel train_centroid(const std::vector<IqFrame>& frames, const AnalysisConfig& cfg) {
    if (frames.empty()) throw DomainError("centroid training needs at least one frame");
    std::set<int> ids;
    for (const auto& f : frames) ids.insert(f.device_id);
    CentroidModel m;
    m.device_ids.assign(ids.begin(), ids.end());
    m.centroids.assign(m.device_ids.size(), {0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(m.device_ids.size(), 0);
    for (const auto& f : frames) {
        const std::size_t c = static_cast<std::size_t>(
            std::lower_bound(m.device_ids.begin(), m.device_ids.end(), f.device_id) -
            m.device_ids.begin());
        const std::array<double, 3> feat = centroid_features(f, cfg);
        for (int d = 0; d < 3; ++d) m.centroids[c][d] += feat[d];
        ++counts[c];
    }
    for (std::size_t c = 0; c < m.centroids.size(); ++c)
        for (int d = 0; d < 3; ++d) m.centroids[c][d] /= static_cast<double>(counts[c]);
    return m;
}

EvalResult evaluate_centroid(const CentroidModel& model, const std::vector<IqFrame>& frames,
                             const AnalysisConfig& cfg) {
    if (frames.empty()) throw DomainError("centroid evaluation needs at least one frame");
    const int num_classes = static_cast<int>(model.device_ids.size());
    std::vector<int> labels, predictions;
    labels.reserve(frames.size());
    predictions.reserve(frames.size());
    for (const auto& f : frames) {
        const auto it =
            std::lower_bound(model.device_ids.begin(), model.device_ids.end(), f.device_id);
        if (it == model.device_ids.end() || *it != f.device_id)
            throw DataError("frame device " + std::to_string(f.device_id) +
                            " unknown to the centroid model");
        labels.push_back(static_cast<int>(it - model.device_ids.begin()));
        const std::array<double, 3> feat = centroid_features(f, cfg);
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int c = 0; c < num_classes; ++c) {
            double d2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                const double diff = feat[d] - model.centroids[c][d];
                d2 += diff * diff;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        predictions.push_back(best);
    }
    return tally(labels, predictions, num_classes);
}

namespace {

struct Cell {
    std::vector<LabeledExample> examples;
    std::vector<const float*> inputs;
    std::vector<int> labels;
    double scale = 1.0;  // max |sample| over the cell, the dataset-level constant
};

struct DayData {
    int day_label = 0;
    Cell stable;
    Cell warmup;
};

void finalize_cell(Cell& cell) {
    cell.inputs.reserve(cell.examples.size());
    cell.labels.reserve(cell.examples.size());
    double peak = 0.0;
    for (const auto& ex : cell.examples) {
        cell.inputs.push_back(ex.tensor.data());
        cell.labels.push_back(ex.label);
        for (float v : ex.tensor) peak = std::max(peak, static_cast<double>(std::fabs(v)));
    }
    cell.scale = peak > 0.0 ? peak : 1.0;
}

int window_index_by_name(const nlohmann::ordered_json& meta, const std::string& name) {
    if (!meta.contains("windows")) return -1;
    const auto& wins = meta.at("windows");
    for (std::size_t i = 0; i < wins.size(); ++i)
        if (wins[i].value("name", "") == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

ExperimentReport run_experiment(Scenario scenario,
                                const std::vector<DatasetContainer>& datasets_per_day,
                                const ExperimentConfig& config) {
    if (datasets_per_day.empty()) throw ConfigError("experiment needs at least one day");
    const std::string train_window = scenario == Scenario::e3_train1_test1
                                         ? config.warmup_window
                                         : config.stable_window;
    const std::string test_window =
        scenario == Scenario::e2_train12_test12 ? config.stable_window : config.warmup_window;

    // Device set and class order (ascending device_id), consistent across days.
    std::set<int> id_set;
    for (const auto& fr : datasets_per_day.front().frames) id_set.insert(fr.device_id);
    std::vector<int> device_ids(id_set.begin(), id_set.end());
    if (device_ids.empty()) throw ConfigError("day container holds no frames");
    auto class_of = [&device_ids](int id) {
        const auto it = std::lower_bound(device_ids.begin(), device_ids.end(), id);
        if (it == device_ids.end() || *it != id)
            throw ConfigError("device " + std::to_string(id) + " missing from the first day");
        return static_cast<int>(it - device_ids.begin());
    };
    const int num_classes = static_cast<int>(device_ids.size());

    // Collect the needed cells, verifying window presence up front.
    std::vector<DayData> days(datasets_per_day.size());
    std::string absences;
    for (std::size_t d = 0; d < datasets_per_day.size(); ++d) {
        const DatasetContainer& ds = datasets_per_day[d];
        days[d].day_label = ds.metadata.value("day_label", static_cast<int>(d) + 1);
        for (const std::string* wname : {&train_window, &test_window}) {
            if (window_index_by_name(ds.metadata, *wname) < 0)
                absences += " day " + std::to_string(days[d].day_label) + " lacks window '" +
                            *wname + "';";
        }
    }
    if (!absences.empty()) throw ConfigError("missing experiment cells:" + absences);

    for (std::size_t d = 0; d < datasets_per_day.size(); ++d) {
        const DatasetContainer& ds = datasets_per_day[d];
        const int stable_idx = window_index_by_name(ds.metadata, config.stable_window);
        const int warmup_idx = window_index_by_name(ds.metadata, config.warmup_window);
        for (const auto& fr : ds.frames) {
            Cell* cell = nullptr;
            if (fr.window_index == stable_idx) cell = &days[d].stable;
            else if (fr.window_index == warmup_idx) cell = &days[d].warmup;
            if (cell == nullptr) continue;
            std::vector<LabeledExample> exs = window_examples(fr, config.window_width);
            const std::size_t take = config.all_windows ? exs.size() : std::min<std::size_t>(1, exs.size());
            for (std::size_t e = 0; e < take; ++e) {
                exs[e].label = class_of(exs[e].label);
                cell->examples.push_back(std::move(exs[e]));
            }
        }
        finalize_cell(days[d].stable);
        finalize_cell(days[d].warmup);
    }

    auto cell_for = [&days](std::size_t day, const std::string& wname,
                            const ExperimentConfig& cfg) -> Cell& {
        return wname == cfg.stable_window ? days[day].stable : days[day].warmup;
    };

    const std::uint64_t scen_salt = static_cast<std::uint64_t>(scenario) + 1;
    const std::size_t D = days.size();

    ExperimentReport report;
    report.scenario = scenario;
    report.train_window = train_window;
    report.test_window = test_window;
    for (const auto& d : days) report.days.push_back(d.day_label);
    report.device_ids = device_ids;
    report.window_width = config.window_width;
    report.accuracy_grid.assign(D, std::vector<double>(D, 0.0));

    // Full-cell models, one per train day, shared across test days.
    std::vector<CnnModel> full_models;
    std::vector<bool> full_ready(D, false);
    full_models.resize(D);
    auto full_model = [&](std::size_t i) -> const CnnModel& {
        if (!full_ready[i]) {
            Cell& tr = cell_for(i, train_window, config);
            if (tr.examples.empty())
                throw ConfigError("train cell day " + std::to_string(days[i].day_label) +
                                  " window '" + train_window + "' is empty");
            TrainHyper hyper = config.hyper;
            hyper.seed = mix_seed(config.seed, scen_salt, static_cast<std::uint64_t>(i));
            CnnModel model = make_cnn(num_classes, config.window_width, hyper.seed);
            const std::size_t pn = std::min<std::size_t>(64, tr.inputs.size());
            std::vector<const float*> probe(tr.inputs.begin(),
                                            tr.inputs.begin() + static_cast<long>(pn));
            calibrate_cnn(model, probe, tr.scale);
            train_cnn(model, tr.inputs, tr.labels, tr.scale, hyper);
            full_models[i] = std::move(model);
            full_ready[i] = true;
        }
        return full_models[i];
    };

    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t j = 0; j < D; ++j) {
            CellResult cell;
            cell.train_day = days[i].day_label;
            cell.test_day = days[j].day_label;
            const bool same_cell = (i == j) && (train_window == test_window);
            if (same_cell) {
                Cell& c = cell_for(i, train_window, config);
                const std::vector<FoldPair> folds = kfold_split(
                    c.examples, config.kfold,
                    mix_seed(config.seed, scen_salt, static_cast<std::uint64_t>(i), 0xF01D));
                Confusion total;
                total.num_classes = num_classes;
                total.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    std::vector<const float*> trx, tex;
                    std::vector<int> trl, tel;
                    for (std::size_t idx : folds[f].train) {
                        trx.push_back(c.inputs[idx]);
                        trl.push_back(c.labels[idx]);
                    }
                    for (std::size_t idx : folds[f].test) {
                        tex.push_back(c.inputs[idx]);
                        tel.push_back(c.labels[idx]);
                    }
                    TrainHyper hyper = config.hyper;
                    hyper.seed = mix_seed(config.seed, scen_salt, static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(f));
                    CnnModel model = make_cnn(num_classes, config.window_width, hyper.seed);
                    const std::size_t pn = std::min<std::size_t>(64, trx.size());
                    std::vector<const float*> probe(trx.begin(),
                                                    trx.begin() + static_cast<long>(pn));
                    calibrate_cnn(model, probe, c.scale);
                    train_cnn(model, trx, trl, c.scale, hyper);
                    const EvalResult r = evaluate_cnn(model, tex, tel, c.scale);
                    cell.fold_accuracies.push_back(r.accuracy);
                    for (std::size_t t = 0; t < total.counts.size(); ++t)
                        total.counts[t] += r.confusion.counts[t];
                }
                cell.accuracy =
                    std::accumulate(cell.fold_accuracies.begin(), cell.fold_accuracies.end(), 0.0) /
                    static_cast<double>(cell.fold_accuracies.size());
                cell.confusion = std::move(total);
            } else {
                const CnnModel& model = full_model(i);
                Cell& trc = cell_for(i, train_window, config);
                Cell& tec = cell_for(j, test_window, config);
                if (tec.examples.empty())
                    throw ConfigError("test cell day " + std::to_string(days[j].day_label) +
                                      " window '" + test_window + "' is empty");
                const EvalResult r = evaluate_cnn(model, tec.inputs, tec.labels, trc.scale);
                cell.accuracy = r.accuracy;
                cell.confusion = r.confusion;
            }
            report.accuracy_grid[i][j] = cell.accuracy;
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report, const std::string& version,
                                      const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["scenario"] = scenario_name(report.scenario);
    j["version"] = version;
    j["config_hash"] = config_hash;
    j["train_window"] = report.train_window;
    j["test_window"] = report.test_window;
    j["days"] = report.days;
    j["device_ids"] = report.device_ids;
    j["window_width"] = report.window_width;
    j["accuracy_grid"] = report.accuracy_grid;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json jc;
        jc["train_day"] = c.train_day;
        jc["test_day"] = c.test_day;
        jc["accuracy"] = c.accuracy;
        jc["fold_accuracies"] = c.fold_accuracies;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int t = 0; t < c.confusion.num_classes; ++t) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int p = 0; p < c.confusion.num_classes; ++p) row.push_back(c.confusion.at(t, p));
            rows.push_back(row);
        }
        jc["confusion"] = rows;
        cells.push_back(jc);
    }
    j["cells"] = cells;
    return j;
}

std::string confusion_to_csv(const Confusion& confusion, const std::vector<int>& device_ids) {
    std::string csv = "true_device";
    for (int id : device_ids) csv += ",pred_" + std::to_string(id);
    csv += "\n";
    for (int t = 0; t < confusion.num_classes; ++t) {
        csv += std::to_string(device_ids[static_cast<std::size_t>(t)]);
        for (int p = 0; p < confusion.num_classes; ++p)
            csv += "," + std::to_string(confusion.at(t, p));
        csv += "\n";
    }
    return csv;
}

}
