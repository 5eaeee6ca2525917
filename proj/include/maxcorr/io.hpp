#pragma once

// Flat-file ingestion. Observations arrive one vector per line (CSV row or
// NDJSON {"x": [...]}) and are grouped into consecutive, non-overlapping
// n-row batches.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "maxcorr/errors.hpp"
#include "maxcorr/stats.hpp"

namespace maxcorr {

enum class InputFormat { kCsv, kNdjson };

InputFormat parse_input_format(const std::string& name);

/// Malformed input; carries the 1-based line number.
class ParseError : public InvalidArgument {
public:
    ParseError(std::int64_t line, const std::string& what)
        : InvalidArgument("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::int64_t line() const noexcept { return line_; }

private:
    std::int64_t line_;
};

struct IngestResult {
    std::vector<Batch> batches;
    std::int64_t rows = 0;
    std::int64_t dropped_rows = 0;
    std::vector<std::string> warnings;
};

/// Reads rows of exactly p finite values. A non-numeric first CSV line is taken
/// as a header and skipped; blank lines are ignored. A trailing partial batch
/// is dropped with a warning.
IngestResult ingest(std::istream& in, InputFormat format, int n, int p);
IngestResult ingest(const std::filesystem::path& path, InputFormat format, int n, int p);

/// Reads the "V" field of each NDJSON record that has one (other records are skipped).
std::vector<double> read_v_stream(std::istream& in);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

void write_batches_csv(std::ostream& out, const std::vector<Batch>& batches);

}  // namespace maxcorr
