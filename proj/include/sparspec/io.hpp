#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sparspec/grid.hpp"
#include "sparspec/mfi_design.hpp"
#include "sparspec/rrmmse.hpp"
#include "sparspec/scene.hpp"

namespace sparspec {

using Json = nlohmann::json;

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double value);

/// {"n": N, "preserved": [indices]} wire format for supports.
Json support_to_json(const SpectrumSupport& support);
SpectrumSupport support_from_json(const Json& j);

Json mfi_report_to_json(const MfiReport& report);

/// Estimate as interleaved re/im, support as 1-based bins, posterior
/// diagonal, per-iteration trace history, termination reason. Iteration
/// wall times are emitted only when include_timing is set (they are not
/// reproducible across runs).
Json estimation_result_to_json(const EstimationResult& result, bool include_timing = false);

Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

Json measurement_to_json(const Measurement& v, const NoiseModel& noise);
std::pair<Measurement, NoiseModel> measurement_from_json(const Json& j);

/// Writes text to `path`, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
Json read_json_file(const std::string& path);

/// Row-oriented CSV writer with a fixed header; floats at 17 significant
/// digits so outputs are byte-reproducible.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    std::string str() const;
    void write(const std::string& path) const;

    static std::string cell(double value) { return format_double(value); }
    static std::string cell(int value) { return std::to_string(value); }
    static std::string cell(long value) { return std::to_string(value); }
    static std::string cell(std::uint64_t value) { return std::to_string(value); }

private:
    std::size_t columns_;
    std::string body_;
};

}  // namespace sparspec
