#include "sparspec/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparspec/errors.hpp"

namespace sparspec {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Json support_to_json(const SpectrumSupport& support) {
    return Json{{"n", support.grid_size()}, {"preserved", support.preserved_indices()}};
}

SpectrumSupport support_from_json(const Json& j) {
    if (!j.contains("n") || !j.contains("preserved"))
        throw ConfigError("support json: expected fields \"n\" and \"preserved\"");
    return SpectrumSupport(j.at("n").get<int>(), j.at("preserved").get<std::vector<int>>());
}

Json mfi_report_to_json(const MfiReport& report) {
    return Json{{"removal_order", report.removal_order},
                {"mfi_values", report.mfi_values},
                {"trace_history", report.trace_history},
                {"final_occupancy", report.final_occupancy}};
}

Json estimation_result_to_json(const EstimationResult& result, bool include_timing) {
    std::vector<double> interleaved;
    interleaved.reserve(static_cast<std::size_t>(result.estimate.size()) * 2);
    for (Eigen::Index i = 0; i < result.estimate.size(); ++i) {
        interleaved.push_back(result.estimate(i).real());
        interleaved.push_back(result.estimate(i).imag());
    }
    std::vector<int> support_one_based;
    for (int bin : result.support.insertion_order()) support_one_based.push_back(bin + 1);
    std::vector<double> posterior(result.posterior_variance_diag.data(),
                                  result.posterior_variance_diag.data() +
                                      result.posterior_variance_diag.size());
    std::vector<double> trace;
    std::vector<double> seconds;
    for (const auto& rec : result.trace_history) {
        trace.push_back(rec.trace_over_m);
        seconds.push_back(rec.seconds);
    }
    Json j{{"estimate_interleaved", interleaved},
           {"support", support_one_based},
           {"posterior_variance", posterior},
           {"trace_history", trace},
           {"termination", to_string(result.termination)},
           {"rank_warning", result.rank_warning}};
    if (include_timing) j["iteration_seconds"] = seconds;
    return j;
}

Json scene_to_json(const Scene& scene) {
    std::vector<double> interleaved;
    interleaved.reserve(static_cast<std::size_t>(scene.gamma.size()) * 2);
    for (Eigen::Index i = 0; i < scene.gamma.size(); ++i) {
        interleaved.push_back(scene.gamma(i).real());
        interleaved.push_back(scene.gamma(i).imag());
    }
    std::vector<int> support_one_based;
    for (int bin : scene.true_support) support_one_based.push_back(bin + 1);
    return Json{{"gamma_interleaved", interleaved},
                {"true_support", support_one_based},
                {"single_scatterer_fallback", scene.single_scatterer_fallback}};
}

Scene scene_from_json(const Json& j) {
    const auto interleaved = j.at("gamma_interleaved").get<std::vector<double>>();
    if (interleaved.size() % 2 != 0)
        throw ConfigError("scene json: interleaved array must have even length");
    Scene scene;
    scene.gamma.resize(static_cast<Eigen::Index>(interleaved.size() / 2));
    for (Eigen::Index i = 0; i < scene.gamma.size(); ++i)
        scene.gamma(i) = {interleaved[2 * static_cast<std::size_t>(i)],
                          interleaved[2 * static_cast<std::size_t>(i) + 1]};
    for (int bin : j.at("true_support").get<std::vector<int>>())
        scene.true_support.push_back(bin - 1);
    scene.single_scatterer_fallback = j.value("single_scatterer_fallback", false);
    return scene;
}

Json measurement_to_json(const Measurement& v, const NoiseModel& noise) {
    std::vector<double> interleaved;
    interleaved.reserve(static_cast<std::size_t>(v.size()) * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        interleaved.push_back(v(i).real());
        interleaved.push_back(v(i).imag());
    }
    return Json{{"values_interleaved", interleaved}, {"noise_variance", noise.variance}};
}

std::pair<Measurement, NoiseModel> measurement_from_json(const Json& j) {
    const auto interleaved = j.at("values_interleaved").get<std::vector<double>>();
    if (interleaved.size() % 2 != 0)
        throw ConfigError("measurement json: interleaved array must have even length");
    Measurement v(static_cast<Eigen::Index>(interleaved.size() / 2));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = {interleaved[2 * static_cast<std::size_t>(i)],
                interleaved[2 * static_cast<std::size_t>(i) + 1]};
    return {std::move(v), NoiseModel{j.at("noise_variance").get<double>()}};
}

void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::string& path) {
    try {
        return Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("json parse error in ") + path + ": " + e.what());
    }
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) body_ += ',';
        body_ += header[i];
    }
    body_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ConfigError("csv: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

std::string CsvWriter::str() const { return body_; }

void CsvWriter::write(const std::string& path) const { write_text_file(path, body_); }

}  // namespace sparspec
