#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "rffp/capture.hpp"
#include "rffp/channel.hpp"
#include "rffp/devices.hpp"
#include "rffp/errors.hpp"
#include "rffp/fingerprint.hpp"
#include "rffp/nn.hpp"

using namespace rffp;

namespace {

std::vector<LabeledExample> labeled_set(const std::vector<int>& per_class_counts) {
    std::vector<LabeledExample> out;
    for (std::size_t cls = 0; cls < per_class_counts.size(); ++cls) {
        for (int k = 0; k < per_class_counts[cls]; ++k) {
            LabeledExample ex;
            ex.label = int(cls);
            out.push_back(ex);
        }
    }
    return out;
}

DeviceProfile stable_device(int id, double cfo_hz) {
    DeviceProfile p;
    p.device_id = id;
    p.cfo_stable_hz = cfo_hz;
    p.cfo_initial_delta_hz = 0.0;
    return p;
}

DatasetContainer quiet_session(const std::vector<DeviceProfile>& population,
                               const std::vector<CaptureWindow>& windows, int frames_per_window,
                               std::uint64_t seed) {
    SessionSpec session;
    for (const DeviceProfile& p : population) session.device_ids.push_back(p.device_id);
    session.day_label = 1;
    session.windows = windows;
    session.frames_per_window = frames_per_window;

    ChannelSpec channel;
    channel.snr_db = 30.0;
    channel.rx_sample_rate_hz = 11e6;
    channel.gain_jitter = false;
    return run_session(population, session, channel, FrameSpec{}, seed);
}

}  // namespace

TEST_SUITE("fingerprint") {

TEST_CASE("kfold_split partitions 4000 examples into 3200/800 folds") {
    const std::vector<LabeledExample> examples = labeled_set({800, 800, 800, 800, 800});
    const std::vector<FoldPair> folds = kfold_split(examples, 5, 21);
    REQUIRE(folds.size() == 5);

    std::vector<int> test_seen(examples.size(), 0);
    for (const FoldPair& fold : folds) {
        CHECK(fold.train.size() == 3200);
        CHECK(fold.test.size() == 800);

        std::set<std::size_t> train_set(fold.train.begin(), fold.train.end());
        std::set<std::size_t> test_set(fold.test.begin(), fold.test.end());
        CHECK(train_set.size() + test_set.size() == examples.size());
        for (std::size_t i : fold.test) {
            CHECK(train_set.count(i) == 0);
            ++test_seen[i];
        }
        // Stratified: each label contributes equally to the held-out fold.
        std::vector<int> per_label(5, 0);
        for (std::size_t i : test_set) ++per_label[std::size_t(examples[i].label)];
        for (int c : per_label) CHECK(c == 160);
    }
    // The test folds tile the whole set exactly once.
    for (int seen : test_seen) CHECK(seen == 1);
}

TEST_CASE("kfold_split keeps fold sizes within one on uneven sets") {
    const std::vector<LabeledExample> examples = labeled_set({5, 5});
    const std::vector<FoldPair> folds = kfold_split(examples, 3, 4);
    REQUIRE(folds.size() == 3);
    std::size_t lo = examples.size(), hi = 0;
    std::size_t total = 0;
    for (const FoldPair& fold : folds) {
        lo = std::min(lo, fold.test.size());
        hi = std::max(hi, fold.test.size());
        total += fold.test.size();
    }
    CHECK(total == examples.size());
    CHECK(hi - lo <= 1);
}

TEST_CASE("kfold_split is deterministic and validates its inputs") {
    const std::vector<LabeledExample> examples = labeled_set({20, 20, 20});
    const std::vector<FoldPair> a = kfold_split(examples, 4, 77);
    const std::vector<FoldPair> b = kfold_split(examples, 4, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].train == b[i].train);
        CHECK(a[i].test == b[i].test);
    }

    CHECK_THROWS_AS(kfold_split(examples, 1, 0), ConfigError);
    CHECK_THROWS_AS(kfold_split(labeled_set({2, 8}), 3, 0), ConfigError);
    CHECK_THROWS_AS(kfold_split({}, 2, 0), ConfigError);
}

TEST_CASE("evaluate_cnn confusion bookkeeping on a constant predictor") {
    // Zero weights and biases score every class equally; argmax ties resolve
    // toward class 0, so the confusion mass lands in column 0.
    CnnModel model = make_cnn(3, 64, 2);
    std::vector<double> params(cnn_param_count(model), 0.0);
    cnn_set_params(model, params);

    std::vector<std::vector<float>> tensors;
    std::vector<const float*> inputs;
    std::vector<int> labels;
    for (int cls = 0; cls < 3; ++cls) {
        for (int k = 0; k < 4 + cls; ++k) {
            tensors.emplace_back(128, float(cls + 1));
            labels.push_back(cls);
        }
    }
    for (const auto& t : tensors) inputs.push_back(t.data());

    const EvalResult res = evaluate_cnn(model, inputs, labels, 1.0);
    CHECK(res.accuracy == doctest::Approx(4.0 / 15.0));
    CHECK(res.confusion.num_classes == 3);
    for (int t = 0; t < 3; ++t) {
        long long row = 0;
        for (int p = 0; p < 3; ++p) row += res.confusion.at(t, p);
        CHECK(row == 4 + t);  // row sums are per-class example counts
        CHECK(res.confusion.at(t, 0) == 4 + t);
    }
}

TEST_CASE("centroid baseline separates stable devices by CFO") {
    const std::vector<DeviceProfile> population = {
        stable_device(0, 3000.0), stable_device(1, 9000.0), stable_device(2, -15000.0)};
    const std::vector<CaptureWindow> windows = {{720.0, 722.0, "min12"}};
    const DatasetContainer train_ds = quiet_session(population, windows, 12, 1001);
    const DatasetContainer test_ds = quiet_session(population, windows, 12, 2002);

    const CentroidModel model = train_centroid(train_ds.frames);
    CHECK(model.device_ids == std::vector<int>{0, 1, 2});
    REQUIRE(model.centroids.size() == 3);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(model.centroids[c][0] ==
              doctest::Approx(population[c].cfo_stable_hz).epsilon(0.05));

    const EvalResult res = evaluate_centroid(model, test_ds.frames);
    CHECK(res.accuracy >= 0.95);
    for (int t = 0; t < 3; ++t) {
        long long row = 0;
        for (int p = 0; p < 3; ++p) row += res.confusion.at(t, p);
        CHECK(row == 12);
    }
}

TEST_CASE("centroid features lead with the squaring CFO estimate") {
    const std::vector<DeviceProfile> population = {stable_device(3, 6000.0)};
    const std::vector<CaptureWindow> windows = {{720.0, 721.0, "min12"}};
    const DatasetContainer ds = quiet_session(population, windows, 2, 5);
    const std::array<double, 3> f = centroid_features(ds.frames[0]);
    CHECK(f[0] == doctest::Approx(6000.0).epsilon(0.02));
    CHECK(f[1] >= 0.0);  // hump rate
}

TEST_CASE("scenario names round-trip") {
    for (Scenario s :
         {Scenario::e1_train12_test1, Scenario::e2_train12_test12, Scenario::e3_train1_test1}) {
        CHECK(scenario_from_name(scenario_name(s)) == s);
    }
    CHECK_THROWS_AS(scenario_from_name("e4_mystery"), ConfigError);
}

TEST_CASE("confusion_to_csv writes device-id headers and rows") {
    Confusion c;
    c.num_classes = 2;
    c.counts = {3, 1, 0, 4};
    const std::string csv = confusion_to_csv(c, {2, 7});
    CHECK(csv == "true_device,pred_2,pred_7\n2,3,1\n7,0,4\n");
}

TEST_CASE("run_experiment fills the day grid deterministically") {
    const std::vector<DeviceProfile> population = {stable_device(0, 4000.0),
                                                   stable_device(1, -12000.0)};
    const std::vector<CaptureWindow> windows = {{60.0, 62.0, "min1"}, {720.0, 722.0, "min12"}};

    std::vector<DatasetContainer> days;
    for (int day = 1; day <= 2; ++day) {
        SessionSpec session;
        session.device_ids = {0, 1};
        session.day_label = day;
        session.windows = windows;
        session.frames_per_window = 9;
        ChannelSpec channel;
        channel.snr_db = 30.0;
        channel.rx_sample_rate_hz = 11e6;
        channel.gain_jitter = false;
        days.push_back(run_session(population, session, channel, FrameSpec{}, 7));
    }

    ExperimentConfig config;
    config.kfold = 3;
    config.hyper.epochs = 10;
    config.seed = 9;

    const ExperimentReport rep = run_experiment(Scenario::e3_train1_test1, days, config);
    CHECK(rep.scenario == Scenario::e3_train1_test1);
    CHECK(rep.train_window == "min1");
    CHECK(rep.test_window == "min1");
    CHECK(rep.days == std::vector<int>{1, 2});
    CHECK(rep.device_ids == std::vector<int>{0, 1});
    REQUIRE(rep.accuracy_grid.size() == 2);
    REQUIRE(rep.cells.size() == 4);
    for (std::size_t i = 0; i < rep.cells.size(); ++i) {
        const CellResult& cell = rep.cells[i];
        CHECK(cell.train_day == rep.days[i / 2]);
        CHECK(cell.test_day == rep.days[i % 2]);
        CHECK(cell.accuracy == rep.accuracy_grid[i / 2][i % 2]);
        CHECK(cell.accuracy >= 0.0);
        CHECK(cell.accuracy <= 1.0);
        if (cell.train_day == cell.test_day) {
            CHECK(cell.fold_accuracies.size() == 3);  // same-cell k-fold CV
        } else {
            CHECK(cell.fold_accuracies.empty());
        }
        long long total = 0;
        for (long long n : cell.confusion.counts) total += n;
        CHECK(total > 0);
    }

    const ExperimentReport again = run_experiment(Scenario::e3_train1_test1, days, config);
    CHECK(again.accuracy_grid == rep.accuracy_grid);

    const nlohmann::ordered_json j = report_to_json(rep, "1.0.0", "cafe1234");
    CHECK(j.at("scenario").get<std::string>() == scenario_name(rep.scenario));
    CHECK(j.at("accuracy_grid").size() == 2);
    CHECK(j.at("config_hash").get<std::string>() == "cafe1234");
}

}
