#pragma once

// End-to-end experiment orchestration: config loading, artifact building,
// the transmit/receive pipeline, SNR sweeps, theory verification, and report
// emission (JSON + CSV + SVG).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "semqam/channel.hpp"
#include "semqam/common.hpp"
#include "semqam/constellation.hpp"
#include "semqam/ingest.hpp"
#include "semqam/metrics.hpp"
#include "semqam/plot.hpp"
#include "semqam/ratecontrol.hpp"
#include "semqam/semantics.hpp"
#include "semqam/serialize.hpp"
#include "semqam/source.hpp"
#include "semqam/synth.hpp"
#include "semqam/theory.hpp"

namespace semqam {

struct DatasetConfig {
    std::string source = "synthetic";  // synthetic | idx | csv
    std::string images_path;
    std::string labels_path;
    std::string csv_path;
    int height = 28;
    int width = 28;
    int train_count = 5000;
    int test_count = 1000;
};

struct PatchConfig {
    int target_side = 32;
    int patch_side = 4;
    int slots() const { return (target_side / patch_side) * (target_side / patch_side); }
};

struct CodebookConfig {
    int max_iters = 30;
    double tol = 1e-4;
    int max_patches = 40000;
};

struct ClassifierConfig {
    int epochs = 12;
    double learning_rate = 0.05;
    int batch_size = 64;
};

struct AgentConfig {
    int bins = 16;
    int episodes = 1000;
    int eval_images = 64;
    int num_actions = 12;
    int k_min = 5;
    int k_max = 64;
    double epsilon = 1.0;
    double epsilon_min = 0.01;
    double epsilon_decay = 0.995;
    double learning_rate = 0.1;
    double discount = 0.99;
};

struct TheoryConfig {
    std::vector<double> snr_list_db = {10.0, 15.0, 20.0};
    std::uint64_t symbols_per_point = 4000000;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    int m_order = 16;
    double power = 1.0;
    PatchConfig patch;
    std::vector<double> snr_grid_db = {-10, -5, 0, 5, 10, 15, 20};
    int trials_per_point = 1;
    std::uint64_t seed = 1;
    TrainConfig train;
    RewardConfig reward;
    CodebookConfig codebook;
    ClassifierConfig classifier;
    AgentConfig agent;
    TheoryConfig theory;
    std::string out_dir = "out";
};

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["dataset"] = {{"source", c.dataset.source},       {"images_path", c.dataset.images_path},
                    {"labels_path", c.dataset.labels_path}, {"csv_path", c.dataset.csv_path},
                    {"height", c.dataset.height},       {"width", c.dataset.width},
                    {"train_count", c.dataset.train_count}, {"test_count", c.dataset.test_count}};
    j["m_order"] = c.m_order;
    j["power"] = c.power;
    j["patch"] = {{"target_side", c.patch.target_side}, {"patch_side", c.patch.patch_side}};
    j["snr_grid_db"] = c.snr_grid_db;
    j["trials_per_point"] = c.trials_per_point;
    j["seed"] = c.seed;
    j["train"] = {{"steps", c.train.steps},
                  {"learning_rate", c.train.learning_rate},
                  {"snr_min_db", c.train.snr_min_db},
                  {"snr_max_db", c.train.snr_max_db},
                  {"batch_size", c.train.batch_size},
                  {"checkpoint_every", c.train.checkpoint_every},
                  {"validation_size", c.train.validation_size}};
    j["reward"] = {{"lambda_ber", c.reward.lambda_ber},
                   {"alpha", c.reward.alpha},
                   {"quality_threshold", c.reward.quality_threshold},
                   {"edge_penalty", c.reward.edge_penalty},
                   {"adapt_coeff", c.reward.adapt_coeff}};
    j["codebook"] = {{"max_iters", c.codebook.max_iters},
                     {"tol", c.codebook.tol},
                     {"max_patches", c.codebook.max_patches}};
    j["classifier"] = {{"epochs", c.classifier.epochs},
                       {"learning_rate", c.classifier.learning_rate},
                       {"batch_size", c.classifier.batch_size}};
    j["agent"] = {{"bins", c.agent.bins},
                  {"episodes", c.agent.episodes},
                  {"eval_images", c.agent.eval_images},
                  {"num_actions", c.agent.num_actions},
                  {"k_min", c.agent.k_min},
                  {"k_max", c.agent.k_max},
                  {"epsilon", c.agent.epsilon},
                  {"epsilon_min", c.agent.epsilon_min},
                  {"epsilon_decay", c.agent.epsilon_decay},
                  {"learning_rate", c.agent.learning_rate},
                  {"discount", c.agent.discount}};
    j["theory"] = {{"snr_list_db", c.theory.snr_list_db},
                   {"symbols_per_point", c.theory.symbols_per_point}};
    j["out_dir"] = c.out_dir;
    return j;
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        c.dataset.source = d.value("source", c.dataset.source);
        c.dataset.images_path = d.value("images_path", c.dataset.images_path);
        c.dataset.labels_path = d.value("labels_path", c.dataset.labels_path);
        c.dataset.csv_path = d.value("csv_path", c.dataset.csv_path);
        c.dataset.height = d.value("height", c.dataset.height);
        c.dataset.width = d.value("width", c.dataset.width);
        c.dataset.train_count = d.value("train_count", c.dataset.train_count);
        c.dataset.test_count = d.value("test_count", c.dataset.test_count);
    }
    c.m_order = j.value("m_order", c.m_order);
    c.power = j.value("power", c.power);
    if (j.contains("patch")) {
        c.patch.target_side = j["patch"].value("target_side", c.patch.target_side);
        c.patch.patch_side = j["patch"].value("patch_side", c.patch.patch_side);
    }
    c.snr_grid_db = j.value("snr_grid_db", c.snr_grid_db);
    c.trials_per_point = j.value("trials_per_point", c.trials_per_point);
    c.seed = j.value("seed", c.seed);
    if (j.contains("train")) {
        const auto& t = j["train"];
        c.train.steps = t.value("steps", c.train.steps);
        c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
        c.train.snr_min_db = t.value("snr_min_db", c.train.snr_min_db);
        c.train.snr_max_db = t.value("snr_max_db", c.train.snr_max_db);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.checkpoint_every = t.value("checkpoint_every", c.train.checkpoint_every);
        c.train.validation_size = t.value("validation_size", c.train.validation_size);
    }
    if (j.contains("reward")) {
        const auto& r = j["reward"];
        c.reward.lambda_ber = r.value("lambda_ber", c.reward.lambda_ber);
        c.reward.alpha = r.value("alpha", c.reward.alpha);
        c.reward.quality_threshold = r.value("quality_threshold", c.reward.quality_threshold);
        c.reward.edge_penalty = r.value("edge_penalty", c.reward.edge_penalty);
        c.reward.adapt_coeff = r.value("adapt_coeff", c.reward.adapt_coeff);
    }
    if (j.contains("codebook")) {
        const auto& k = j["codebook"];
        c.codebook.max_iters = k.value("max_iters", c.codebook.max_iters);
        c.codebook.tol = k.value("tol", c.codebook.tol);
        c.codebook.max_patches = k.value("max_patches", c.codebook.max_patches);
    }
    if (j.contains("classifier")) {
        const auto& k = j["classifier"];
        c.classifier.epochs = k.value("epochs", c.classifier.epochs);
        c.classifier.learning_rate = k.value("learning_rate", c.classifier.learning_rate);
        c.classifier.batch_size = k.value("batch_size", c.classifier.batch_size);
    }
    if (j.contains("agent")) {
        const auto& a = j["agent"];
        c.agent.bins = a.value("bins", c.agent.bins);
        c.agent.episodes = a.value("episodes", c.agent.episodes);
        c.agent.eval_images = a.value("eval_images", c.agent.eval_images);
        c.agent.num_actions = a.value("num_actions", c.agent.num_actions);
        c.agent.k_min = a.value("k_min", c.agent.k_min);
        c.agent.k_max = a.value("k_max", c.agent.k_max);
        c.agent.epsilon = a.value("epsilon", c.agent.epsilon);
        c.agent.epsilon_min = a.value("epsilon_min", c.agent.epsilon_min);
        c.agent.epsilon_decay = a.value("epsilon_decay", c.agent.epsilon_decay);
        c.agent.learning_rate = a.value("learning_rate", c.agent.learning_rate);
        c.agent.discount = a.value("discount", c.agent.discount);
    }
    if (j.contains("theory")) {
        const auto& t = j["theory"];
        c.theory.snr_list_db = t.value("snr_list_db", c.theory.snr_list_db);
        c.theory.symbols_per_point = t.value("symbols_per_point", c.theory.symbols_per_point);
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    return c;
}

inline void validate_config(const ExperimentConfig& c) {
    if (c.m_order != 4 && c.m_order != 16 && c.m_order != 64 && c.m_order != 256 &&
        c.m_order != 1024)
        throw ConfigError("config: m_order must be one of 4,16,64,256,1024");
    if (c.power <= 0.0) throw ConfigError("config: power must be positive");
    if (c.snr_grid_db.empty()) throw ConfigError("config: snr_grid_db is empty");
    if (c.trials_per_point < 1) throw ConfigError("config: trials_per_point < 1");
    if (c.dataset.source == "idx") {
        if (!std::filesystem::exists(c.dataset.images_path))
            throw ConfigError("config: missing images file " + c.dataset.images_path);
        if (!std::filesystem::exists(c.dataset.labels_path))
            throw ConfigError("config: missing labels file " + c.dataset.labels_path);
    } else if (c.dataset.source == "csv") {
        if (!std::filesystem::exists(c.dataset.csv_path))
            throw ConfigError("config: missing csv file " + c.dataset.csv_path);
    } else if (c.dataset.source != "synthetic") {
        throw ConfigError("config: unknown dataset source '" + c.dataset.source + "'");
    }
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
    return fnv1a64(config_to_json(c).dump());
}

inline std::pair<ImageDataset, ImageDataset> load_split_dataset(const ExperimentConfig& c) {
    ImageDataset all;
    if (c.dataset.source == "synthetic") {
        all = make_digit_dataset(c.dataset.train_count + c.dataset.test_count, c.seed);
    } else if (c.dataset.source == "idx") {
        all = parse_idx(read_file_bytes(c.dataset.images_path),
                        read_file_bytes(c.dataset.labels_path));
    } else {
        all = parse_csv(read_file_text(c.dataset.csv_path), c.dataset.height, c.dataset.width);
    }
    const int need = c.dataset.train_count + c.dataset.test_count;
    if (int(all.images.size()) < need)
        throw DataError("dataset has " + std::to_string(all.images.size()) +
                        " images, need " + std::to_string(need));
    ImageDataset train, test;
    train.height = test.height = all.height;
    train.width = test.width = all.width;
    train.num_classes = test.num_classes = all.num_classes;
    for (int i = 0; i < c.dataset.train_count; ++i) {
        train.images.push_back(all.images[i]);
        train.labels.push_back(all.labels[i]);
    }
    for (int i = 0; i < c.dataset.test_count; ++i) {
        test.images.push_back(all.images[c.dataset.train_count + i]);
        test.labels.push_back(all.labels[c.dataset.train_count + i]);
    }
    return {std::move(train), std::move(test)};
}

struct Artifacts {
    ImageDataset train;
    ImageDataset test;
    ConceptCodebook codebook;
    SciModel sci;
    TaskClassifier classifier;
    SourceStatistics stats;
    Constellation gray;
    Constellation learned;
    std::vector<ConceptGrid> test_grids;
    PatchConfig patch;
    int m_order = 0;
    double power = 1.0;
};

// Draws (index, sci) occurrences directly from aggregated source statistics.
inline SampleStream stats_stream(const SourceStatistics& st) {
    double total = 0.0;
    std::vector<double> cdf(st.usage_counts.size());
    for (std::size_t i = 0; i < st.usage_counts.size(); ++i) {
        total += double(st.usage_counts[i]);
        cdf[i] = total;
    }
    if (total == 0.0) throw DataError("stats_stream: empty usage counts");
    return [cdf, total, sci = st.avg_sci](Rng& rng) {
        const double u = rng.uniform() * total;
        std::size_t i = std::size_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (i >= cdf.size()) i = cdf.size() - 1;
        return SciSample{int(i), sci[i]};
    };
}

inline Artifacts build_artifacts(const ExperimentConfig& cfg) {
    validate_config(cfg);
    Artifacts art;
    art.patch = cfg.patch;
    art.m_order = cfg.m_order;
    art.power = cfg.power;
    auto [train, test] = load_split_dataset(cfg);
    art.train = std::move(train);
    art.test = std::move(test);

    const int N = cfg.patch.slots();
    std::vector<PatchGrid> train_grids(art.train.images.size());
    for (std::size_t i = 0; i < art.train.images.size(); ++i)
        train_grids[i] = patchify(art.train.images[i], art.train.height, art.train.width,
                                  cfg.patch.target_side, cfg.patch.patch_side);

    std::vector<std::vector<double>> pool;
    pool.reserve(std::size_t(cfg.codebook.max_patches));
    {
        std::vector<const std::vector<double>*> all;
        for (const auto& g : train_grids)
            for (const auto& p : g.patches) all.push_back(&p);
        Rng rng(mix_seed(cfg.seed, 0x9001, 0));
        if (int(all.size()) <= cfg.codebook.max_patches) {
            for (const auto* p : all) pool.push_back(*p);
        } else {
            for (int i = 0; i < cfg.codebook.max_patches; ++i)
                pool.push_back(*all[rng.below(all.size())]);
        }
    }
    art.codebook = train_codebook(pool, cfg.m_order, cfg.seed, cfg.codebook.max_iters,
                                  cfg.codebook.tol);

    art.classifier = train_classifier(art.train, cfg.classifier.epochs,
                                      cfg.classifier.learning_rate, cfg.classifier.batch_size,
                                      cfg.seed);

    std::vector<std::vector<int>> train_indices(train_grids.size());
    for (std::size_t i = 0; i < train_grids.size(); ++i)
        train_indices[i] = quantize_grid(art.codebook, train_grids[i]);
    art.sci = estimate_sci(train_indices, art.train.labels, cfg.m_order, N,
                           art.train.num_classes);
    std::vector<ConceptGrid> train_concepts(train_indices.size());
    for (std::size_t i = 0; i < train_indices.size(); ++i)
        train_concepts[i] = make_concept_grid(art.sci, train_indices[i]);
    art.stats = compute_statistics(train_concepts, cfg.m_order);

    art.gray = gray_qam(cfg.m_order, cfg.power);
    {
        std::vector<SciSample> occurrences;
        occurrences.reserve(train_concepts.size() * std::size_t(N));
        for (const auto& g : train_concepts)
            for (std::size_t s = 0; s < g.indices.size(); ++s)
                occurrences.push_back({g.indices[s], g.per_slot_sci[s]});
        TrainConfig tc = cfg.train;
        tc.seed = mix_seed(cfg.seed, 0x5e11, 0);
        art.learned =
            train_constellation(pool_stream(std::move(occurrences)), cfg.m_order, cfg.power, tc);
    }

    art.test_grids.resize(art.test.images.size());
    for (std::size_t i = 0; i < art.test.images.size(); ++i) {
        const PatchGrid g = patchify(art.test.images[i], art.test.height, art.test.width,
                                     cfg.patch.target_side, cfg.patch.patch_side);
        art.test_grids[i] = make_concept_grid(art.sci, quantize_grid(art.codebook, g));
    }
    return art;
}

struct PipelineOutcome {
    SemanticQuality quality;
    LinkResult link;
    int symbols_per_image = 0;
};

inline PipelineOutcome run_pipeline(const Artifacts& art, const Constellation& cst, int K,
                                    double snr_db, std::uint64_t seed, int max_images = -1) {
    const int N = art.patch.slots();
    if (K < 1 || K > N) throw ConfigError("run_pipeline: K out of range");
    const std::size_t count =
        max_images < 0 ? art.test_grids.size()
                       : std::min(art.test_grids.size(), std::size_t(max_images));
    if (count == 0) throw DataError("run_pipeline: no test images");

    std::vector<std::vector<int>> positions(count);
    std::vector<int> stream;
    stream.reserve(count * std::size_t(K));
    for (std::size_t i = 0; i < count; ++i) {
        positions[i] = top_k(art.test_grids[i].per_slot_sci, K);
        for (int pos : positions[i]) stream.push_back(art.test_grids[i].indices[pos]);
    }

    ChannelConfig chan;
    chan.snr_db = snr_db;
    chan.seed = seed;
    PipelineOutcome out;
    out.symbols_per_image = K;
    std::vector<int> decoded;
    out.link = simulate_link(cst, stream, chan, &decoded);

    std::vector<std::vector<double>> originals(count), recons(count);
    std::vector<int> labels(count);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::pair<int, int>> received;
        received.reserve(positions[i].size());
        for (int pos : positions[i]) received.emplace_back(pos, decoded[cursor++]);
        recons[i] = reconstruct(art.codebook, received, art.patch.target_side / art.patch.patch_side,
                                art.patch.target_side / art.patch.patch_side, art.patch.patch_side,
                                art.test.height, art.test.width);
        originals[i] = art.test.images[i];
        labels[i] = art.test.labels[i];
    }
    out.quality = semantic_quality(art.classifier, originals, recons, labels);
    return out;
}

inline RateEvaluator make_rate_evaluator(const Artifacts& art, const Constellation& cst,
                                         int eval_images) {
    return [&art, &cst, eval_images](int K, double snr_db, std::uint64_t ep_seed) {
        const PipelineOutcome out = run_pipeline(art, cst, K, snr_db, ep_seed, eval_images);
        return std::make_pair(out.quality.q_task, out.link.ber());
    };
}

inline int raw_baseline_symbols_ceil(int height, int width, int bits_per_symbol) {
    const int bits = height * width * 8;
    return (bits + bits_per_symbol - 1) / bits_per_symbol;
}

inline int raw_baseline_symbols_trunc(int height, int width, int bits_per_symbol) {
    return (height * width * 8) / bits_per_symbol;
}

struct SweepRow {
    double snr_db = 0.0;
    std::string variant;
    int k = 0;
    SemanticQuality quality;
    double ber = 0.0;
    double ser = 0.0;
    double symbols_per_image = 0.0;
    double compression_ratio = 0.0;
    SemanticQuality quality_full_k;
    double ber_full_k = 0.0;
};

struct ExperimentReport {
    std::vector<SweepRow> rows;
    VulnerabilityReport vuln_gray;
    VulnerabilityReport vuln_learned;
    StationarityReport kkt_gray;
    StationarityReport kkt_learned;
    GapReport gap;
    QAgent agent;
    std::vector<double> episode_rewards;
    double mean_k_bottom_bin = 0.0;
    double mean_k_top_bin = 0.0;
    int raw_baseline_ceil = 0;
    int raw_baseline_trunc = 0;
    std::uint64_t cfg_hash = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
};

namespace detail {

inline json quality_to_json(const SemanticQuality& q) {
    return json{{"q_sem", q.q_sem}, {"q_task", q.q_task}, {"p_conf", q.p_conf},
                {"s_dist", q.s_dist}};
}

inline json vuln_to_json(const VulnerabilityReport& v) {
    json j;
    j["per_symbol_ssv"] = v.per_symbol_ssv;
    j["weighted_ssv"] = v.weighted_ssv;
    if (v.spp)
        j["spp"] = *v.spp;
    else
        j["spp"] = "not-applicable";
    j["mean_vulnerability"] = v.mean_vulnerability;
    j["top_set"] = v.top_set;
    j["delta"] = v.delta;
    j["gamma"] = v.gamma;
    return j;
}

inline json stationarity_to_json(const StationarityReport& s) {
    return json{{"zeta_star", s.zeta_star},
                {"kkt_residual_max", s.kkt_residual_max},
                {"kkt_residual_mean", s.kkt_residual_mean},
                {"projected_gradient_norm", s.projected_gradient_norm},
                {"is_stationary", s.is_stationary}};
}

inline json gap_to_json(const GapReport& g) {
    return json{{"empirical_gap", g.empirical_gap}, {"bound_value", g.bound_value},
                {"d_min", g.d_min},                 {"d_max", g.d_max},
                {"w_max", g.w_max},                 {"zeta_star", g.zeta_star}};
}

inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

inline json report_to_json(const ExperimentReport& rep) {
    json j = format_header("report");
    j["provenance"] = {{"config_hash", rep.cfg_hash}, {"seed", rep.seed}};
    j["raw_baseline"] = {{"ceil", rep.raw_baseline_ceil}, {"trunc", rep.raw_baseline_trunc}};
    j["failed"] = rep.failed;
    if (rep.failed) j["failure"] = rep.failure;
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["snr_db"] = r.snr_db;
        row["variant"] = r.variant;
        row["k"] = r.k;
        row["quality"] = detail::quality_to_json(r.quality);
        row["ber"] = r.ber;
        row["ser"] = r.ser;
        row["symbols_per_image"] = r.symbols_per_image;
        row["compression_ratio"] = r.compression_ratio;
        row["quality_full_k"] = detail::quality_to_json(r.quality_full_k);
        row["ber_full_k"] = r.ber_full_k;
        rows.push_back(row);
    }
    j["rows"] = rows;
    if (!rep.failed) {
        j["vulnerability"] = {{"gray", detail::vuln_to_json(rep.vuln_gray)},
                              {"learned", detail::vuln_to_json(rep.vuln_learned)}};
        j["stationarity"] = {{"gray", detail::stationarity_to_json(rep.kkt_gray)},
                             {"learned", detail::stationarity_to_json(rep.kkt_learned)}};
        j["gap"] = detail::gap_to_json(rep.gap);
        j["rate_control"] = {{"mean_k_bottom_bin", rep.mean_k_bottom_bin},
                             {"mean_k_top_bin", rep.mean_k_top_bin},
                             {"actions", rep.agent.actions},
                             {"episodes", rep.episode_rewards.size()}};
    }
    return j;
}

inline std::string report_to_csv(const ExperimentReport& rep) {
    std::string csv =
        "snr_db,variant,k,q_sem,q_task,p_conf,s_dist,ber,ser,symbols_per_image,"
        "compression_ratio,q_sem_full_k,ber_full_k\n";
    for (const auto& r : rep.rows) {
        csv += detail::csv_num(r.snr_db) + "," + r.variant + "," + std::to_string(r.k) + "," +
               detail::csv_num(r.quality.q_sem) + "," + detail::csv_num(r.quality.q_task) + "," +
               detail::csv_num(r.quality.p_conf) + "," + detail::csv_num(r.quality.s_dist) + "," +
               detail::csv_num(r.ber) + "," + detail::csv_num(r.ser) + "," +
               detail::csv_num(r.symbols_per_image) + "," + detail::csv_num(r.compression_ratio) +
               "," + detail::csv_num(r.quality_full_k.q_sem) + "," +
               detail::csv_num(r.ber_full_k) + "\n";
    }
    return csv;
}

// Structural validation of a serialized report document.
inline void validate_report_json(const json& j) {
    require_format(j, "report");
    static const char* top[] = {"provenance", "raw_baseline", "failed", "rows"};
    for (const char* key : top)
        if (!j.contains(key)) throw FormatError(std::string("report missing key ") + key);
    if (!j["rows"].is_array()) throw FormatError("report rows must be an array");
    for (const auto& row : j["rows"]) {
        static const char* cols[] = {"snr_db", "variant", "k",   "quality",
                                     "ber",    "ser",     "symbols_per_image",
                                     "compression_ratio"};
        for (const char* key : cols)
            if (!row.contains(key)) throw FormatError(std::string("row missing key ") + key);
        if (!row["quality"].is_object() || !row["quality"].contains("q_sem"))
            throw FormatError("row quality malformed");
    }
    if (!j["failed"].get<bool>()) {
        static const char* extra[] = {"vulnerability", "stationarity", "gap", "rate_control"};
        for (const char* key : extra)
            if (!j.contains(key)) throw FormatError(std::string("report missing key ") + key);
    }
}

inline ExperimentReport run_sweep(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    rep.cfg_hash = config_hash(cfg);
    rep.seed = cfg.seed;
    try {
        const Artifacts art = build_artifacts(cfg);
        const int N = cfg.patch.slots();
        const int b = art.codebook.bits_per_symbol;
        rep.raw_baseline_ceil = raw_baseline_symbols_ceil(art.test.height, art.test.width, b);
        rep.raw_baseline_trunc = raw_baseline_symbols_trunc(art.test.height, art.test.width, b);

        QAgent seed_agent = make_agent(cfg.agent.bins,
                                       action_space(cfg.agent.k_min, cfg.agent.k_max,
                                                    cfg.agent.num_actions),
                                       cfg.train.snr_min_db, cfg.train.snr_max_db);
        seed_agent.epsilon = cfg.agent.epsilon;
        seed_agent.epsilon_min = cfg.agent.epsilon_min;
        seed_agent.epsilon_decay = cfg.agent.epsilon_decay;
        seed_agent.learning_rate = cfg.agent.learning_rate;
        seed_agent.discount = cfg.agent.discount;
        RewardConfig rc = cfg.reward;
        rc.k_min = cfg.agent.k_min;
        rc.k_max = cfg.agent.k_max;
        TrainAgentResult tr = train_agent(
            make_rate_evaluator(art, art.learned, cfg.agent.eval_images), cfg.agent.episodes, N,
            rc, mix_seed(cfg.seed, 0xa9e7, 0), std::move(seed_agent));
        rep.agent = std::move(tr.agent);
        rep.episode_rewards = std::move(tr.episode_rewards);
        rep.mean_k_bottom_bin = mean_selected_k(rep.agent, 0, 0);
        rep.mean_k_top_bin = mean_selected_k(rep.agent, rep.agent.num_bins() - 1,
                                             rep.agent.num_bins() - 1);

        const double span = rep.agent.snr_max_db - rep.agent.snr_min_db;
        for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
            const double snr = cfg.snr_grid_db[si];
            const double snr_norm =
                span > 0.0
                    ? std::clamp((snr - rep.agent.snr_min_db) / span, 0.0, 1.0)
                    : 0.0;
            const int K = rep.agent.actions[greedy_action(rep.agent, snr_bin(rep.agent, snr_norm))];
            const std::vector<std::pair<std::string, const Constellation*>> variants = {
                {"gray", &art.gray}, {"learned", &art.learned}};
            for (const auto& [name, cst] : variants) {
                SweepRow row;
                row.snr_db = snr;
                row.variant = name;
                row.k = K;
                double ber = 0.0, ser = 0.0, ber_fk = 0.0;
                SemanticQuality q{}, qfk{};
                for (int t = 0; t < cfg.trials_per_point; ++t) {
                    const std::uint64_t s =
                        mix_seed(cfg.seed, si, std::uint64_t(t), fnv1a64(name));
                    const PipelineOutcome out = run_pipeline(art, *cst, K, snr, s);
                    const PipelineOutcome full =
                        run_pipeline(art, *cst, N, snr, mix_seed(s, 0xf011, 0));
                    ber += out.link.ber();
                    ser += out.link.ser();
                    ber_fk += full.link.ber();
                    q.q_sem += out.quality.q_sem;
                    q.q_task += out.quality.q_task;
                    q.p_conf += out.quality.p_conf;
                    q.s_dist += out.quality.s_dist;
                    qfk.q_sem += full.quality.q_sem;
                    qfk.q_task += full.quality.q_task;
                    qfk.p_conf += full.quality.p_conf;
                    qfk.s_dist += full.quality.s_dist;
                }
                const double inv = 1.0 / double(cfg.trials_per_point);
                row.ber = ber * inv;
                row.ser = ser * inv;
                row.ber_full_k = ber_fk * inv;
                row.quality = {q.q_sem * inv, q.q_task * inv, q.p_conf * inv, q.s_dist * inv};
                row.quality_full_k = {qfk.q_sem * inv, qfk.q_task * inv, qfk.p_conf * inv,
                                      qfk.s_dist * inv};
                row.symbols_per_image = K;
                row.compression_ratio = double(rep.raw_baseline_ceil) / double(K);
                rep.rows.push_back(row);
            }
        }

        rep.vuln_gray = vulnerability_report(art.gray, art.stats);
        rep.vuln_learned = vulnerability_report(art.learned, art.stats);
        rep.kkt_gray = kkt_residual(art.gray, art.stats);
        rep.kkt_learned = kkt_residual(art.learned, art.stats);
        rep.gap = gap_bound(art.stats, art.gray, art.learned, cfg.power);
    } catch (const std::exception& e) {
        rep.failed = true;
        rep.failure = e.what();
    }
    return rep;
}

struct TheoryOutcome {
    bool applicable = true;
    bool pass = true;
    StationarityReport kkt_gray;
    StationarityReport kkt_learned;
    GapReport gap;
    std::vector<BerParadoxRow> paradox;
    double ssv_gray = 0.0;
    double ssv_learned = 0.0;
    std::vector<std::string> messages;
};

inline TheoryOutcome verify_theory_checks(const Constellation& gray, const Constellation& learned,
                                          const SourceStatistics& stats, const TheoryConfig& tc,
                                          std::uint64_t seed) {
    TheoryOutcome out;
    if (stats.concentration <= 0.0 || stats.asymmetry <= 0.0) {
        out.applicable = false;
        out.messages.push_back("precondition not met: delta or gamma is zero, checks skipped");
        return out;
    }
    out.kkt_gray = kkt_residual(gray, stats);
    out.kkt_learned = kkt_residual(learned, stats);
    out.gap = gap_bound(stats, gray, learned, gray.power_budget);
    out.ssv_gray = weighted_ssv(gray, stats);
    out.ssv_learned = weighted_ssv(learned, stats);
    out.paradox = ber_paradox_check(gray, learned, stats, tc.snr_list_db, tc.symbols_per_point,
                                    seed);

    auto check = [&](bool ok, const std::string& msg) {
        out.messages.push_back(std::string(ok ? "pass: " : "FAIL: ") + msg);
        if (!ok) out.pass = false;
    };
    check(out.ssv_learned < out.ssv_gray, "weighted SSV strictly lower for learned constellation");
    check(out.gap.empirical_gap > 0.0, "protection gap positive");
    check(out.kkt_gray.projected_gradient_norm > 1e-3, "Gray constellation is non-stationary");
    for (const auto& row : out.paradox) {
        check(row.ber_learned >= row.ber_gray,
              "BER(learned) >= BER(gray) at " + detail::csv_num(row.snr_db) + " dB");
        check(row.sem_err_learned < row.sem_err_gray,
              "semantic error rate strictly lower at " + detail::csv_num(row.snr_db) + " dB");
    }
    return out;
}

inline json theory_to_json(const TheoryOutcome& t) {
    json j = format_header("theory");
    j["applicable"] = t.applicable;
    j["pass"] = t.pass;
    j["messages"] = t.messages;
    if (t.applicable) {
        j["stationarity"] = {{"gray", detail::stationarity_to_json(t.kkt_gray)},
                             {"learned", detail::stationarity_to_json(t.kkt_learned)}};
        j["gap"] = detail::gap_to_json(t.gap);
        j["weighted_ssv"] = {{"gray", t.ssv_gray}, {"learned", t.ssv_learned}};
        json rows = json::array();
        for (const auto& r : t.paradox)
            rows.push_back({{"snr_db", r.snr_db},
                            {"ber_gray", r.ber_gray},
                            {"ber_learned", r.ber_learned},
                            {"sem_err_gray", r.sem_err_gray},
                            {"sem_err_learned", r.sem_err_learned},
                            {"errors_gray", r.errors_gray},
                            {"errors_learned", r.errors_learned}});
        j["ber_paradox"] = rows;
    }
    return j;
}

// Partial reconstruction: enough of a report to re-render plots.
inline ExperimentReport report_from_json(const json& j) {
    validate_report_json(j);
    ExperimentReport rep;
    rep.failed = j.at("failed").get<bool>();
    if (rep.failed) throw DataError("report is marked failed; nothing to plot");
    rep.cfg_hash = j.at("provenance").at("config_hash").get<std::uint64_t>();
    rep.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    rep.raw_baseline_ceil = j.at("raw_baseline").at("ceil").get<int>();
    rep.raw_baseline_trunc = j.at("raw_baseline").at("trunc").get<int>();
    for (const auto& row : j.at("rows")) {
        SweepRow r;
        r.snr_db = row.at("snr_db").get<double>();
        r.variant = row.at("variant").get<std::string>();
        r.k = row.at("k").get<int>();
        const auto& q = row.at("quality");
        r.quality = {q.at("q_sem").get<double>(), q.at("q_task").get<double>(),
                     q.at("p_conf").get<double>(), q.at("s_dist").get<double>()};
        r.ber = row.at("ber").get<double>();
        r.ser = row.at("ser").get<double>();
        r.symbols_per_image = row.at("symbols_per_image").get<double>();
        r.compression_ratio = row.at("compression_ratio").get<double>();
        rep.rows.push_back(r);
    }
    auto parse_vuln = [](const json& v) {
        VulnerabilityReport rep_v;
        rep_v.per_symbol_ssv = v.at("per_symbol_ssv").get<std::vector<double>>();
        rep_v.weighted_ssv = v.at("weighted_ssv").get<double>();
        if (v.at("spp").is_number()) rep_v.spp = v.at("spp").get<double>();
        rep_v.mean_vulnerability = v.at("mean_vulnerability").get<double>();
        rep_v.top_set = v.at("top_set").get<std::vector<int>>();
        rep_v.delta = v.at("delta").get<double>();
        rep_v.gamma = v.at("gamma").get<double>();
        return rep_v;
    };
    rep.vuln_gray = parse_vuln(j.at("vulnerability").at("gray"));
    rep.vuln_learned = parse_vuln(j.at("vulnerability").at("learned"));
    return rep;
}

inline void render_plots(const ExperimentReport& rep, const std::string& out_dir) {
    if (rep.rows.empty()) throw DataError("render_plots: empty report");
    std::filesystem::create_directories(out_dir);

    auto series_for = [&](const std::string& variant, auto getter) {
        Series s;
        s.name = variant;
        for (const auto& r : rep.rows)
            if (r.variant == variant) {
                s.x.push_back(r.snr_db);
                s.y.push_back(getter(r));
            }
        return s;
    };
    const auto q_sem = [](const SweepRow& r) { return r.quality.q_sem; };
    const auto ber = [](const SweepRow& r) { return r.ber; };
    const auto sym = [](const SweepRow& r) { return r.symbols_per_image; };

    write_text_file(out_dir + "/q_sem_vs_snr.svg",
                    svg_line_plot("Semantic quality vs SNR", "SNR (dB)", "Q_sem",
                                  {series_for("gray", q_sem), series_for("learned", q_sem)}));
    write_text_file(out_dir + "/ber_vs_snr.svg",
                    svg_line_plot("Bit error rate vs SNR", "SNR (dB)", "BER",
                                  {series_for("gray", ber), series_for("learned", ber)}, true));
    write_text_file(out_dir + "/symbols_vs_snr.svg",
                    svg_line_plot("Payload size vs SNR", "SNR (dB)", "symbols per image",
                                  {series_for("learned", sym)}));

    const std::vector<std::string> cats = {"M=" + std::to_string(rep.vuln_gray.per_symbol_ssv.size())};
    BarGroup g1{"gray", {rep.vuln_gray.weighted_ssv}};
    BarGroup g2{"learned", {rep.vuln_learned.weighted_ssv}};
    write_text_file(out_dir + "/weighted_ssv.svg",
                    svg_bar_chart("Weighted SSV", "S_w", cats, {g1, g2}));
    BarGroup p1{"gray", {rep.vuln_gray.spp.value_or(0.0)}};
    BarGroup p2{"learned", {rep.vuln_learned.spp.value_or(0.0)}};
    write_text_file(out_dir + "/spp.svg",
                    svg_bar_chart("Semantic protection probability", "S_p", cats, {p1, p2}));
}

}  // namespace semqam
