#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "ib/common.hpp"
#include "ib/grid_source.hpp"
#include "ib/joint.hpp"
#include "ib/pmf.hpp"
#include "ib/quantizer.hpp"
#include "ib/rectangles.hpp"
#include "ib/solver.hpp"
#include "ib/version.hpp"

namespace ib {

// Shortest decimal string that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline nlohmann::json joint_to_json(const JointPMF& j) {
    nlohmann::json axes = nlohmann::json::array();
    for (const auto& a : j.axes()) axes.push_back({{"name", a.name}, {"size", a.size}});
    return nlohmann::json{{"axes", axes}, {"table", j.table()}};
}

inline JointPMF joint_from_json(const nlohmann::json& js) {
    std::vector<Axis> axes;
    for (const auto& a : js.at("axes"))
        axes.push_back({a.at("name").get<std::string>(), a.at("size").get<std::size_t>()});
    return JointPMF(std::move(axes), js.at("table").get<std::vector<double>>());
}

inline nlohmann::json kernel_to_json(const Kernel& k) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < k.input_size(); ++i) {
        auto s = k.row_span(i);
        rows.push_back(std::vector<double>(s.begin(), s.end()));
    }
    return rows;
}

inline Kernel kernel_from_json(const nlohmann::json& js) {
    return Kernel(js.get<std::vector<std::vector<double>>>());
}

inline nlohmann::json grid_source_to_json(const GridSource& src) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c = 0; c < src.cell_count(); ++c)
        cells.push_back({{"id", src.ids[c]}, {"weight", src.weights[c]}});
    return nlohmann::json{{"cells", cells},
                          {"y_channel", kernel_to_json(src.y_channel)},
                          {"u_channel", kernel_to_json(src.u_channel)}};
}

inline GridSource grid_source_from_json(const nlohmann::json& js) {
    std::vector<std::string> ids;
    std::vector<double> w;
    for (const auto& cell : js.at("cells")) {
        ids.push_back(cell.at("id").get<std::string>());
        w.push_back(cell.at("weight").get<double>());
    }
    return GridSource(std::move(ids), PMF(std::move(w)), kernel_from_json(js.at("y_channel")),
                      kernel_from_json(js.at("u_channel")));
}

inline nlohmann::json quantization_report_to_json(const QuantizationReport& r) {
    return nlohmann::json{
        {"delta", r.delta},
        {"occupied_cells", r.occupied_cells},
        {"mi",
         {{"i_xu", r.i_xu},
          {"i_yu", r.i_yu},
          {"i_xy", r.i_xy},
          {"i_xhat_utilde", r.i_xhat_utilde},
          {"i_y_utilde", r.i_y_utilde},
          {"i_y_xhat", r.i_y_xhat}}},
        {"distances", {{"d_u", r.d_u}, {"d_yu", r.d_yu}}},
        {"bounds", {{"rate_term", r.rate_bound_term}, {"score_term", r.score_bound_term}}},
        {"slacks", {{"rate", r.rate_slack}, {"score", r.score_slack}}},
        {"ok", r.ok()}};
}

inline nlohmann::json covers_to_json(const std::vector<RectCover>& covers) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : covers)
        out.push_back({{"label", c.label},
                       {"delta", c.delta},
                       {"residual_mass", c.residual_mass},
                       {"rectangles", c.rects}});
    return out;
}

inline nlohmann::json gap_report_to_json(const GapReport& r) {
    return nlohmann::json{{"delta", r.delta},
                          {"m_size", r.m_size},
                          {"n", r.n},
                          {"distances", {{"pair", r.d_pair}, {"marginal", r.d_marginal}}},
                          {"bounds", {{"pair", r.bound_pair}, {"marginal", r.bound_marginal}}},
                          {"ok", r.ok()}};
}

inline nlohmann::json gridded_code_to_json(const GriddedCode& code) {
    return nlohmann::json{
        {"n", code.n}, {"letters", code.letters}, {"m_size", code.m_size}, {"labels", code.labels}};
}

inline GriddedCode gridded_code_from_json(const nlohmann::json& js) {
    return GriddedCode(js.at("n").get<std::size_t>(), js.at("letters").get<std::size_t>(),
                       js.at("m_size").get<std::size_t>(),
                       js.at("labels").get<std::vector<std::size_t>>());
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json js;
    in >> js;
    return js;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

// CSV with a fixed comment line (config hash + version) and a header row;
// all doubles in shortest round-trip form, so equal configs give equal bytes.
class CsvWriter {
  public:
    CsvWriter(std::uint64_t config_hash, const std::string& header) {
        std::ostringstream hash;
        hash << std::hex << config_hash;
        body_ = "# ibx " + std::string(kVersion) + " config=" + hash.str() + "\n" + header + "\n";
    }

    void cell(const std::string& v) {
        if (!line_.empty()) line_ += ",";
        line_ += v;
    }
    void cell(double v) { cell(format_double(v)); }
    void cell(std::uint64_t v) { cell(std::to_string(v)); }
    void end_row() {
        body_ += line_ + "\n";
        line_.clear();
    }

    const std::string& str() const { return body_; }
    void save(const std::string& path) const { write_text_file(path, body_); }

  private:
    std::string body_;
    std::string line_;
};

}  // namespace ib
