#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latentclean/evaluation.hpp"
#include "latentclean/synthdata.hpp"

using namespace latentclean;

TEST_CASE("jaccard identity, analytic 15 percent, and zero cases", "[jaccard]") {
    std::vector<int> truth(100);
    for (size_t i = 0; i < 100; ++i) truth[i] = static_cast<int>(i % 10);
    LabelMap source = LabelMap::from(truth);
    REQUIRE(jaccard(source, source) == 1.0);

    std::vector<int> noised = truth;
    for (size_t i = 0; i < 15; ++i) noised[i] = (noised[i] + 1) % 10;
    REQUIRE(jaccard(source, LabelMap::from(noised)) == Catch::Approx(0.85));
    REQUIRE(jaccard_strict(source, LabelMap::from(noised)) == Catch::Approx(85.0 / 115.0));

    std::vector<int> all_wrong(100, 10);
    for (size_t i = 0; i < 100; ++i) all_wrong[i] = (truth[i] + 1) % 10;
    REQUIRE(jaccard(source, LabelMap::from(all_wrong)) == 0.0);
}

TEST_CASE("jaccard matches a direct set count on random maps", "[jaccard][oracle]") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t n = 50 + rng.below(100);
        std::vector<int> truth(n), cand_labels;
        std::vector<size_t> cand_idx;
        for (auto& v : truth) v = static_cast<int>(rng.below(5));
        for (size_t i = 0; i < n; ++i) {
            if (rng.uniform01() < 0.7) {
                cand_idx.push_back(i);
                cand_labels.push_back(static_cast<int>(rng.below(5)));
            }
        }
        if (cand_idx.empty()) continue;
        LabelMap source = LabelMap::from(truth);
        LabelMap cand;
        cand.indices = cand_idx;
        cand.labels = cand_labels;

        size_t inter = 0;
        for (size_t i = 0; i < cand_idx.size(); ++i) inter += truth[cand_idx[i]] == cand_labels[i];
        REQUIRE(jaccard(source, cand) == Catch::Approx(static_cast<double>(inter) / static_cast<double>(n)));
        REQUIRE(jaccard_strict(source, cand) ==
                Catch::Approx(static_cast<double>(inter) /
                              static_cast<double>(n + cand_idx.size() - inter)));
    }
}

TEST_CASE("jaccard rejects candidates outside the source", "[jaccard]") {
    LabelMap source = LabelMap::from({0, 1, 2});
    LabelMap cand;
    cand.indices = {5};
    cand.labels = {0};
    REQUIRE_THROWS_AS(jaccard(source, cand), ArgumentError);
    LabelMap empty;
    REQUIRE_THROWS_AS(jaccard(empty, cand), ArgumentError);
}

TEST_CASE("performance delta and its sign semantics", "[performance]") {
    REQUIRE(performance(0.9591, 0.85) == Catch::Approx(0.1091));
    REQUIRE(performance(0.4, 0.4) == 0.0);
    REQUIRE(performance(0.2, 0.85) == Catch::Approx(-0.65));
    REQUIRE_THROWS_AS(performance(1.2, 0.5), ArgumentError);

    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        double a = rng.uniform01(), b = rng.uniform01();
        REQUIRE(performance(a, b) == Catch::Approx(-performance(b, a)));
    }
}

TEST_CASE("retained accuracy analytic cases", "[accuracy]") {
    std::vector<int> truth(200);
    for (size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 10);
    std::vector<int> current = truth;
    for (size_t i = 0; i < 30; ++i) current[i] = (current[i] + 3) % 10; // 15% noise

    std::vector<size_t> everything(200);
    for (size_t i = 0; i < 200; ++i) everything[i] = i;
    REQUIRE(retained_accuracy(everything, current, truth) == Catch::Approx(0.85));

    std::vector<size_t> only_clean;
    for (size_t i = 30; i < 200; ++i) only_clean.push_back(i);
    REQUIRE(retained_accuracy(only_clean, current, truth) == 1.0);

    REQUIRE_THROWS_AS(retained_accuracy({}, current, truth), DegenerateError);
}

TEST_CASE("retained accuracy matches a hand count on random removals", "[accuracy][oracle]") {
    Rng rng(4);
    LabeledDataset ds = make_synthetic_dataset(SynthKind::Shapes28, 150, 9);
    auto [noised, ledger] = inject_noise(ds, 0.2, 5);
    std::vector<size_t> retained;
    for (size_t i = 0; i < noised.size(); ++i) {
        if (rng.uniform01() < 0.8) retained.push_back(i);
    }
    size_t correct = 0;
    for (size_t i : retained) correct += noised.labels[i] == noised.true_labels[i];
    REQUIRE(retained_accuracy(retained, noised.labels, noised.true_labels) ==
            Catch::Approx(static_cast<double>(correct) / static_cast<double>(retained.size())));
}

TEST_CASE("removal precision and recall against the ledger", "[accuracy]") {
    NoiseLedger ledger;
    for (size_t i : {2u, 5u, 9u, 14u}) {
        ledger.flipped_indices.insert(i);
        ledger.original_label[i] = 0;
        ledger.assigned_label[i] = 1;
    }
    RemovalQuality q = removal_quality({2, 5, 7}, ledger);
    REQUIRE(q.true_positives == 2);
    REQUIRE(q.precision == Catch::Approx(2.0 / 3.0));
    REQUIRE(q.recall == Catch::Approx(0.5));

    RemovalQuality none = removal_quality({}, ledger);
    REQUIRE(none.precision == 0.0);
    REQUIRE(none.recall == 0.0);
}

TEST_CASE("spearman rank correlation behaves on known inputs", "[spearman]") {
    REQUIRE(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Catch::Approx(1.0));
    REQUIRE(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == Catch::Approx(-1.0));
    REQUIRE(spearman({1, 2, 3, 4}, {5, 5, 5, 5}) == 0.0);
    // Monotone but nonlinear stays 1 under ranks.
    REQUIRE(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == Catch::Approx(1.0));
    // Ties get average ranks: hand-computed value.
    double r = spearman({1, 2, 2, 4}, {1, 2, 3, 4});
    REQUIRE(r == Catch::Approx(0.9486832980505138));
    REQUIRE_THROWS_AS(spearman({1}, {1}), ArgumentError);
    REQUIRE_THROWS_AS(spearman({1, 2}, {1}), ArgumentError);
}

TEST_CASE("report round trips losslessly through text", "[report]") {
    EvaluationReport r;
    r.jaccard_noised = 0.85;
    r.jaccard_denoised = 0.9591;
    r.jaccard_strict_noised = 85.0 / 115.0;
    r.jaccard_strict_denoised = 0.77;
    r.performance_p = 0.1091;
    r.retained_acc = 0.9591;
    r.removal_precision = 0.62;
    r.removal_recall = 0.58;
    r.mean_psnr = 43.1528675309;
    r.psnr_inf_count = 2;
    r.total_count = 5000;
    r.retained_count = 4300;
    r.removed_count = 700;
    r.flipped_count = 750;
    r.per_class_removed = {{0, 71}, {3, 64}, {9, 80}};
    r.config_echo = {{"kl_formula", "standard"}, {"seed", "7"}, {"epochs", "30"}};

    EvaluationReport back = parse_report(report_to_text(r));
    REQUIRE(back.jaccard_noised == r.jaccard_noised);
    REQUIRE(back.jaccard_denoised == r.jaccard_denoised);
    REQUIRE(back.jaccard_strict_noised == r.jaccard_strict_noised);
    REQUIRE(back.performance_p == r.performance_p);
    REQUIRE(back.retained_acc == r.retained_acc);
    REQUIRE(back.mean_psnr == r.mean_psnr);
    REQUIRE(back.psnr_inf_count == r.psnr_inf_count);
    REQUIRE(back.per_class_removed == r.per_class_removed);
    REQUIRE(back.config_echo == r.config_echo);
    REQUIRE(report_to_text(back) == report_to_text(r));

    REQUIRE_THROWS_AS(parse_report("bogus"), FormatError);
}

TEST_CASE("build_report wires detection output into the metrics", "[report]") {
    LabeledDataset ds = make_synthetic_dataset(SynthKind::Shapes28, 200, 10);
    auto [noised, ledger] = inject_noise(ds, 0.15, 6);

    DetectionResult det;
    det.total = noised.size();
    // Remove exactly the flipped indices: a perfect detector.
    det.removed.assign(ledger.flipped_indices.begin(), ledger.flipped_indices.end());
    for (size_t i = 0; i < noised.size(); ++i) {
        if (!ledger.flipped_indices.count(i)) det.retained.push_back(i);
    }
    ClassDetection cd;
    cd.class_id = 0;
    cd.outlier_indices = det.removed;
    det.per_class.push_back(cd);

    PsnrSummary psnr_summary;
    psnr_summary.mean = 40.0;
    psnr_summary.finite_count = 200;

    EvaluationReport r = build_report(noised, ledger, det, psnr_summary, {{"seed", "6"}});
    REQUIRE(r.jaccard_noised == Catch::Approx(0.85));
    REQUIRE(r.jaccard_denoised == 1.0);
    REQUIRE(r.retained_acc == 1.0);
    REQUIRE(r.performance_p == Catch::Approx(0.15));
    REQUIRE(r.removal_precision == 1.0);
    REQUIRE(r.removal_recall == 1.0);
    REQUIRE(r.flipped_count == 30);
    REQUIRE(r.removed_count == 30);
    REQUIRE(r.retained_count == 170);
}

TEST_CASE("sweep produces one record per budget and supports continuation", "[sweep][slow]") {
    LabeledDataset ds = make_synthetic_dataset(SynthKind::Shapes28, 60, 11);
    auto [noised, ledger] = inject_noise(ds, 0.15, 7);
    CaeArchitecture arch = CaeArchitecture::make({28, 28, 1}, 8);
    TrainingConfig cfg;
    cfg.batch_size = 32;
    cfg.rng_seed = 3;

    auto records = psnr_accuracy_sweep(noised, ledger, arch, {1}, cfg, {});
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].epoch_budget == 1);
    REQUIRE(std::isfinite(records[0].mean_psnr));

    auto two = psnr_accuracy_sweep(noised, ledger, arch, {1, 3}, cfg, {});
    REQUIRE(two.size() == 2);
    REQUIRE(two[0].epoch_budget == 1);
    REQUIRE(two[1].epoch_budget == 3);
    // Continuation reuses the same stream: budget-1 record must match.
    REQUIRE(two[0].mean_psnr == records[0].mean_psnr);
    REQUIRE(two[0].retained_acc == records[0].retained_acc);

    REQUIRE_THROWS_AS(psnr_accuracy_sweep(noised, ledger, arch, {}, cfg, {}), ArgumentError);
    REQUIRE_THROWS_AS(psnr_accuracy_sweep(noised, ledger, arch, {3, 2}, cfg, {}), ArgumentError);
}

TEST_CASE("sweep csv format", "[sweep]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "latentclean_eval_tests";
    fs::create_directories(dir);
    std::vector<SweepRecord> records = {{5, 43.15, 0.9137}, {15, 55.82, 0.9492}};
    const std::string path = (dir / "sweep.csv").string();
    write_sweep_csv(path, records);
    REQUIRE(read_text_file(path) ==
            "epoch_budget,mean_psnr,retained_accuracy\n5,43.15,0.9137\n15,55.82,0.9492\n");
}
