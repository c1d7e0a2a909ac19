#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "latentclean/pipeline.hpp"
#include "latentclean/synthdata.hpp"

using namespace latentclean;
namespace fs = std::filesystem;

namespace {

/// Dataset of n tiny images labeled per `labels`, images distinct per index.
LabeledDataset tiny_dataset(const std::vector<int>& labels) {
    LabeledDataset ds;
    ds.num_classes = 10;
    ds.name = "tiny";
    ds.format = SourceFormat::Idx;
    for (size_t i = 0; i < labels.size(); ++i) {
        Tensor img({4, 4, 1});
        img.data[i % 16] = static_cast<float>((i % 255) + 1) / 255.0f;
        ds.images.push_back(img);
        ds.labels.push_back(labels[i]);
        ds.true_labels.push_back(labels[i]);
    }
    return ds;
}

std::vector<LatentPoint> latents_from(const std::vector<int>& labels,
                                      const std::vector<std::vector<float>>& mus) {
    std::vector<LatentPoint> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        out[i].sample_index = i;
        out[i].label = labels[i];
        out[i].mu = mus[i];
        out[i].sigma.assign(mus[i].size(), 1.0f);
    }
    return out;
}

fs::path temp_dir(const char* leaf) {
    fs::path d = fs::temp_directory_path() / leaf;
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("a single tight blob yields zero removals", "[pipeline]") {
    Rng rng(3);
    std::vector<int> labels(60, 2);
    std::vector<std::vector<float>> mus;
    for (int i = 0; i < 60; ++i) {
        mus.push_back({static_cast<float>(rng.uniform(-0.5, 0.5)), static_cast<float>(rng.uniform(-0.5, 0.5))});
    }
    LabeledDataset ds = tiny_dataset(labels);
    DetectionResult result = detect_and_remove(ds, latents_from(labels, mus), {});
    REQUIRE(result.removed.empty());
    REQUIRE(result.retained.size() == 60);
    REQUIRE(result.per_class.size() == 1);
    REQUIRE_FALSE(result.per_class[0].skipped);
}

TEST_CASE("a far-away group of five is removed exactly", "[pipeline][oracle]") {
    Rng rng(4);
    std::vector<int> labels(55, 7);
    std::vector<std::vector<float>> mus;
    for (int i = 0; i < 50; ++i) {
        mus.push_back({static_cast<float>(rng.uniform(-1.0, 1.0)), static_cast<float>(rng.uniform(-1.0, 1.0))});
    }
    // Five strays, mutually far apart and ~100 units out.
    for (int i = 0; i < 5; ++i) {
        float angle = static_cast<float>(i) * 1.3f;
        mus.push_back({100.0f * std::cos(angle), 100.0f * std::sin(angle)});
    }
    LabeledDataset ds = tiny_dataset(labels);
    DetectionResult result = detect_and_remove(ds, latents_from(labels, mus), {});
    REQUIRE(result.removed == std::vector<size_t>{50, 51, 52, 53, 54});
    REQUIRE(result.per_class[0].epsilon > 0.0);
    REQUIRE(result.per_class[0].epsilon < 100.0);
}

TEST_CASE("classes below min_points + 1 are skipped, not removed", "[pipeline]") {
    std::vector<int> labels(40, 1);
    for (int i = 0; i < 4; ++i) labels.push_back(9); // class 9 too small for minPts 5
    Rng rng(5);
    std::vector<std::vector<float>> mus;
    for (size_t i = 0; i < labels.size(); ++i) {
        mus.push_back({static_cast<float>(rng.uniform(-1.0, 1.0)), static_cast<float>(rng.uniform(-1.0, 1.0))});
    }
    LabeledDataset ds = tiny_dataset(labels);
    DetectionResult result = detect_and_remove(ds, latents_from(labels, mus), {});
    REQUIRE(result.per_class.size() == 2);
    REQUIRE(result.per_class[1].class_id == 9);
    REQUIRE(result.per_class[1].skipped);
    for (size_t idx : result.removed) REQUIRE(ds.labels[idx] != 9);
}

TEST_CASE("detection validates its inputs", "[pipeline]") {
    std::vector<int> labels(10, 0);
    Rng rng(6);
    std::vector<std::vector<float>> mus(10, std::vector<float>{0.0f, 0.0f});
    LabeledDataset ds = tiny_dataset(labels);
    auto latents = latents_from(labels, mus);
    latents.pop_back();
    REQUIRE_THROWS_AS(detect_and_remove(ds, latents, {}), ArgumentError);

    latents = latents_from(labels, mus);
    std::swap(latents[0], latents[1]);
    REQUIRE_THROWS_AS(detect_and_remove(ds, latents, {}), ArgumentError);

    latents = latents_from(labels, mus);
    DetectionSettings bad;
    bad.eps_mode = EpsMode::Fixed;
    bad.fixed_epsilon = 0.0;
    REQUIRE_THROWS_AS(detect_and_remove(ds, latents, bad), ArgumentError);
}

TEST_CASE("removal never alters retained samples and partitions the index set", "[pipeline]") {
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(i % 4); // 15 members per class
    LabeledDataset ds = tiny_dataset(labels);
    Rng rng(7);
    std::vector<std::vector<float>> mus;
    for (size_t i = 0; i < ds.size(); ++i) {
        float base = static_cast<float>(ds.labels[i]) * 10.0f;
        mus.push_back({base + static_cast<float>(rng.uniform(-0.4, 0.4)),
                       static_cast<float>(rng.uniform(-0.4, 0.4))});
    }
    // Plant two obvious outliers inside class 0.
    std::vector<size_t> planted_idx = {0, 4};
    mus[0] = {500.0f, -800.0f};
    mus[4] = {590.0f, -800.0f};
    auto latents = latents_from(ds.labels, mus);

    DetectionResult result = detect_and_remove(ds, latents, {});
    REQUIRE(result.removed.size() + result.retained.size() == ds.size());
    for (size_t idx : planted_idx) {
        REQUIRE(std::binary_search(result.removed.begin(), result.removed.end(), idx));
    }
    LabeledDataset kept = retained_dataset(ds, result);
    size_t k = 0;
    for (size_t i : result.retained) {
        REQUIRE(kept.labels[k] == ds.labels[i]);
        REQUIRE(kept.images[k].data == ds.images[i].data);
        ++k;
    }
}

TEST_CASE("class processing order does not change the removed set", "[pipeline]") {
    LabeledDataset ds = make_synthetic_dataset(SynthKind::Shapes28, 100, 13);
    Rng rng(8);
    std::vector<std::vector<float>> mus;
    for (size_t i = 0; i < ds.size(); ++i) {
        float base = static_cast<float>(ds.labels[i]) * 8.0f;
        mus.push_back({base + static_cast<float>(rng.uniform(-0.5, 0.5)),
                       static_cast<float>(rng.uniform(-0.5, 0.5))});
    }
    mus[10] = {1000.0f, 1000.0f};
    auto latents = latents_from(ds.labels, mus);

    DetectionResult forward_order = detect_and_remove(ds, latents, {});

    // Recompose per class in reverse order through the same per-class helper.
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
    std::set<size_t> removed;
    for (auto it = by_class.rbegin(); it != by_class.rend(); ++it) {
        auto det = detail::detect_one_class(latents, it->second, it->first, {}, std::nullopt);
        removed.insert(det.outlier_indices.begin(), det.outlier_indices.end());
    }
    std::vector<size_t> reversed(removed.begin(), removed.end());
    REQUIRE(reversed == forward_order.removed);
}

TEST_CASE("detection reads only current labels, never ground truth", "[pipeline]") {
    std::vector<int> labels(30, 0);
    Rng rng(9);
    std::vector<std::vector<float>> mus;
    for (int i = 0; i < 30; ++i) {
        mus.push_back({static_cast<float>(rng.uniform(-1.0, 1.0)), static_cast<float>(rng.uniform(-1.0, 1.0))});
    }
    LabeledDataset ds = tiny_dataset(labels);
    auto latents = latents_from(labels, mus);
    DetectionResult a = detect_and_remove(ds, latents, {});
    for (auto& t : ds.true_labels) t = 5; // scrambling truth must change nothing
    DetectionResult b = detect_and_remove(ds, latents, {});
    REQUIRE(a.removed == b.removed);
}

TEST_CASE("fixed and global epsilon modes are honored", "[pipeline]") {
    std::vector<int> labels(20, 0);
    for (int i = 0; i < 20; ++i) labels.push_back(1);
    Rng rng(10);
    std::vector<std::vector<float>> mus;
    for (size_t i = 0; i < labels.size(); ++i) {
        float base = labels[i] == 0 ? 0.0f : 50.0f;
        mus.push_back({base + static_cast<float>(rng.uniform(-1.0, 1.0)),
                       static_cast<float>(rng.uniform(-1.0, 1.0))});
    }
    LabeledDataset ds = tiny_dataset(labels);
    auto latents = latents_from(labels, mus);

    DetectionSettings fixed;
    fixed.eps_mode = EpsMode::Fixed;
    fixed.fixed_epsilon = 3.0;
    DetectionResult rf = detect_and_remove(ds, latents, fixed);
    for (const auto& det : rf.per_class) REQUIRE(det.epsilon == 3.0);

    DetectionSettings global;
    global.eps_mode = EpsMode::Global;
    DetectionResult rg = detect_and_remove(ds, latents, global);
    REQUIRE(rg.per_class.size() == 2);
    REQUIRE(rg.per_class[0].epsilon == rg.per_class[1].epsilon);
}

TEST_CASE("write_cleaned round trips through the dataset reader", "[pipeline][oracle]") {
    auto dir = temp_dir("latentclean_pipeline_rt");
    LabeledDataset ds = make_synthetic_dataset(SynthKind::Shapes28, 100, 14);
    auto [noised, ledger] = inject_noise(ds, 0.1, 3);

    // Forged detection result removing five fixed indices.
    DetectionResult result;
    result.total = noised.size();
    result.removed = {3, 17, 42, 65, 99};
    for (size_t i = 0; i < noised.size(); ++i) {
        if (!std::binary_search(result.removed.begin(), result.removed.end(), i)) {
            result.retained.push_back(i);
        }
    }
    ClassDetection det;
    det.class_id = 0;
    det.outlier_indices = result.removed;
    det.epsilon = 1.5;
    result.per_class.push_back(det);

    write_cleaned(noised, result, dir.string(), &ledger);

    LabeledDataset kept = read_idx((dir / "cleaned-images-idx3-ubyte").string(),
                                   (dir / "cleaned-labels-idx1-ubyte").string(), "kept", 10);
    REQUIRE(kept.size() == 95);
    LabeledDataset expect = retained_dataset(noised, result);
    for (size_t i = 0; i < kept.size(); ++i) {
        REQUIRE(kept.labels[i] == expect.labels[i]);
        REQUIRE(kept.images[i].data == expect.images[i].data);
    }

    auto removed = read_removal_manifest((dir / "removal_manifest.csv").string());
    REQUIRE(removed == result.removed);

    // Zero removals: the written pair is byte-identical to a direct write.
    DetectionResult none;
    none.total = noised.size();
    for (size_t i = 0; i < noised.size(); ++i) none.retained.push_back(i);
    auto dir2 = temp_dir("latentclean_pipeline_rt0");
    write_cleaned(noised, none, dir2.string(), nullptr);
    write_idx(noised, (dir2 / "direct-images").string(), (dir2 / "direct-labels").string());
    REQUIRE(read_text_file((dir2 / "cleaned-images-idx3-ubyte").string()) ==
            read_text_file((dir2 / "direct-images").string()));
    REQUIRE(read_text_file((dir2 / "cleaned-labels-idx1-ubyte").string()) ==
            read_text_file((dir2 / "direct-labels").string()));
}

TEST_CASE("assignment csv covers every sample once", "[pipeline]") {
    auto dir = temp_dir("latentclean_pipeline_csv");
    std::vector<int> labels(30, 0);
    for (int i = 0; i < 12; ++i) labels.push_back(4);
    Rng rng(15);
    std::vector<std::vector<float>> mus;
    for (size_t i = 0; i < labels.size(); ++i) {
        float base = labels[i] == 0 ? 0.0f : 30.0f;
        mus.push_back({base + static_cast<float>(rng.uniform(-1.0, 1.0)),
                       static_cast<float>(rng.uniform(-1.0, 1.0))});
    }
    LabeledDataset ds = tiny_dataset(labels);
    DetectionResult result = detect_and_remove(ds, latents_from(labels, mus), {});
    write_assignment_csv((dir / "assign.csv").string(), result);
    std::string text = read_text_file((dir / "assign.csv").string());
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 1 + 42);
    REQUIRE(text.rfind("sample_index,cluster,role\n", 0) == 0);
}
