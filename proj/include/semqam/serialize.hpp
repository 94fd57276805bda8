#pragma once

// Versioned JSON persistence for every trained artifact. Each document
// carries {"format": "semqam/<kind>", "version": 1} and loaders reject
// mismatches up front.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semqam/common.hpp"
#include "semqam/constellation.hpp"
#include "semqam/ratecontrol.hpp"
#include "semqam/semantics.hpp"
#include "semqam/source.hpp"

namespace semqam {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

inline json format_header(const std::string& kind) {
    return json{{"format", "semqam/" + kind}, {"version", kFormatVersion}};
}

inline void require_format(const json& j, const std::string& kind) {
    if (!j.is_object() || !j.contains("format") || !j.contains("version"))
        throw FormatError("document missing format/version header");
    if (j["format"] != "semqam/" + kind)
        throw FormatError("expected format semqam/" + kind + ", found " +
                          j["format"].dump());
    if (j["version"] != kFormatVersion)
        throw FormatError("unsupported version " + j["version"].dump() + " for semqam/" + kind);
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("invalid JSON in " + path + ": " + e.what());
    }
}

inline json codebook_to_json(const ConceptCodebook& cb) {
    json j = format_header("codebook");
    j["bits_per_symbol"] = cb.bits_per_symbol;
    j["entries"] = cb.entries;
    return j;
}

inline ConceptCodebook codebook_from_json(const json& j) {
    require_format(j, "codebook");
    ConceptCodebook cb;
    cb.bits_per_symbol = j.at("bits_per_symbol").get<int>();
    cb.entries = j.at("entries").get<std::vector<std::vector<double>>>();
    return cb;
}

inline json stats_to_json(const SourceStatistics& st) {
    json j = format_header("source-stats");
    j["avg_sci"] = st.avg_sci;
    j["cooccurrence"] = st.cooccurrence;
    j["mean_sci"] = st.mean_sci;
    j["concentration"] = st.concentration;
    j["asymmetry"] = st.asymmetry;
    j["usage_counts"] = st.usage_counts;
    return j;
}

inline SourceStatistics stats_from_json(const json& j) {
    require_format(j, "source-stats");
    SourceStatistics st;
    st.avg_sci = j.at("avg_sci").get<std::vector<double>>();
    st.cooccurrence = j.at("cooccurrence").get<std::vector<std::vector<double>>>();
    st.mean_sci = j.at("mean_sci").get<double>();
    st.concentration = j.at("concentration").get<double>();
    st.asymmetry = j.at("asymmetry").get<double>();
    st.usage_counts = j.at("usage_counts").get<std::vector<std::int64_t>>();
    return st;
}

inline json sci_model_to_json(const SciModel& model) {
    json j = format_header("sci-model");
    j["slot_relevance"] = model.slot_relevance;
    j["concept_informativeness"] = model.concept_informativeness;
    return j;
}

inline SciModel sci_model_from_json(const json& j) {
    require_format(j, "sci-model");
    SciModel m;
    m.slot_relevance = j.at("slot_relevance").get<std::vector<double>>();
    m.concept_informativeness = j.at("concept_informativeness").get<std::vector<double>>();
    return m;
}

inline json classifier_to_json(const TaskClassifier& clf) {
    json j = format_header("classifier");
    j["height"] = clf.height;
    j["width"] = clf.width;
    j["weights"] = clf.weights;
    j["biases"] = clf.biases;
    return j;
}

inline TaskClassifier classifier_from_json(const json& j) {
    require_format(j, "classifier");
    TaskClassifier clf;
    clf.height = j.at("height").get<int>();
    clf.width = j.at("width").get<int>();
    clf.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    clf.biases = j.at("biases").get<std::vector<double>>();
    return clf;
}

inline json constellation_to_json(const Constellation& cst, std::uint64_t seed = 0,
                                  std::uint64_t config_hash = 0) {
    json j = format_header("constellation");
    json pts = json::array();
    for (const cplx& p : cst.points) pts.push_back(json::array({p.real(), p.imag()}));
    j["points"] = pts;
    j["power_budget"] = cst.power_budget;
    j["labeling"] = cst.labeling;
    j["provenance"] = {{"seed", seed}, {"config_hash", config_hash}};
    return j;
}

inline Constellation constellation_from_json(const json& j) {
    require_format(j, "constellation");
    Constellation cst;
    for (const auto& p : j.at("points"))
        cst.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    cst.power_budget = j.at("power_budget").get<double>();
    cst.labeling = j.at("labeling").get<std::vector<int>>();
    return cst;
}

inline json agent_to_json(const QAgent& agent) {
    json j = format_header("agent");
    j["q_values"] = agent.q_values;
    j["actions"] = agent.actions;
    j["snr_min_db"] = agent.snr_min_db;
    j["snr_max_db"] = agent.snr_max_db;
    j["epsilon"] = agent.epsilon;
    j["epsilon_min"] = agent.epsilon_min;
    j["epsilon_decay"] = agent.epsilon_decay;
    j["learning_rate"] = agent.learning_rate;
    j["discount"] = agent.discount;
    return j;
}

inline QAgent agent_from_json(const json& j) {
    require_format(j, "agent");
    QAgent a;
    a.q_values = j.at("q_values").get<std::vector<std::vector<double>>>();
    a.actions = j.at("actions").get<std::vector<int>>();
    a.snr_min_db = j.at("snr_min_db").get<double>();
    a.snr_max_db = j.at("snr_max_db").get<double>();
    a.epsilon = j.at("epsilon").get<double>();
    a.epsilon_min = j.at("epsilon_min").get<double>();
    a.epsilon_decay = j.at("epsilon_decay").get<double>();
    a.learning_rate = j.at("learning_rate").get<double>();
    a.discount = j.at("discount").get<double>();
    return a;
}

}  // namespace semqam
