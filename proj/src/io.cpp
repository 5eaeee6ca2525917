#include "maxcorr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include <json.hpp>

namespace maxcorr {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view field) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

// Splits a CSV line; nullopt if any field is not a number.
std::optional<std::vector<double>> parse_csv_row(std::string_view line) {
    std::vector<double> values;
    while (true) {
        const auto comma = line.find(',');
        const auto value = parse_number(line.substr(0, comma));
        if (!value) return std::nullopt;
        values.push_back(*value);
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return values;
}

class BatchAssembler {
public:
    BatchAssembler(int n, int p) : n_(n), p_(p), current_(n, p) {}

    void add(const std::vector<double>& row, std::int64_t line) {
        if (static_cast<int>(row.size()) != p_)
            throw ParseError(line, "expected " + std::to_string(p_) + " values, got " + std::to_string(row.size()));
        for (int j = 0; j < p_; ++j) {
            if (!std::isfinite(row[j])) throw ParseError(line, "non-finite value");
            current_(filled_, j) = row[j];
        }
        ++result_.rows;
        if (++filled_ == n_) {
            result_.batches.push_back(current_);
            filled_ = 0;
        }
    }

    IngestResult finish() {
        if (filled_ > 0) {
            result_.dropped_rows = filled_;
            result_.warnings.push_back("dropped " + std::to_string(filled_) + " trailing row(s) that do not fill a batch of " +
                                       std::to_string(n_));
        }
        return std::move(result_);
    }

private:
    int n_;
    int p_;
    int filled_ = 0;
    Batch current_;
    IngestResult result_;
};

}  // namespace

InputFormat parse_input_format(const std::string& name) {
    if (name == "csv") return InputFormat::kCsv;
    if (name == "ndjson") return InputFormat::kNdjson;
    throw InvalidArgument("unknown input format '" + name + "' (expected csv or ndjson)");
}

IngestResult ingest(std::istream& in, InputFormat format, int n, int p) {
    if (n < 2) throw InvalidArgument("ingest: n must be >= 2");
    if (p < 2) throw InvalidArgument("ingest: p must be >= 2");
    BatchAssembler assembler(n, p);
    std::string line;
    std::int64_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const bool first = !seen_content;
        seen_content = true;

        if (format == InputFormat::kCsv) {
            auto row = parse_csv_row(text);
            if (!row) {
                if (first) continue;  // header
                throw ParseError(line_no, "non-numeric field");
            }
            assembler.add(*row, line_no);
            continue;
        }

        nlohmann::json record;
        try {
            record = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object() || !record.contains("x") || !record["x"].is_array())
            throw ParseError(line_no, "record lacks an \"x\" array");
        std::vector<double> row;
        row.reserve(record["x"].size());
        for (const auto& item : record["x"]) {
            if (!item.is_number()) throw ParseError(line_no, "non-numeric entry in \"x\"");
            row.push_back(item.get<double>());
        }
        assembler.add(row, line_no);
    }
    return assembler.finish();
}

IngestResult ingest(const std::filesystem::path& path, InputFormat format, int n, int p) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    return ingest(in, format, n, p);
}

std::vector<double> read_v_stream(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.is_object() || !record.contains("V")) continue;
        if (!record["V"].is_number()) throw ParseError(line_no, "\"V\" is not a number");
        values.push_back(record["V"].get<double>());
    }
    return values;
}

std::string format_double(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_batches_csv(std::ostream& out, const std::vector<Batch>& batches) {
    for (const Batch& b : batches) {
        for (Eigen::Index i = 0; i < b.rows(); ++i) {
            for (Eigen::Index j = 0; j < b.cols(); ++j) out << (j ? "," : "") << format_double(b(i, j));
            out << '\n';
        }
    }
}

}  // namespace maxcorr
