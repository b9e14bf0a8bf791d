#pragma once

#include <string>
#include <vector>

#include "shl0/dataset.hpp"

namespace shl0 {

/// Result of loading a CSV: the standardized dataset, the trials column (if
/// one was requested) and the names of any constant columns that had to be
/// dropped.
struct IngestResult {
    Dataset<double> data;
    VecX<double> trials;  // size 0 unless a trials column was requested
    std::vector<std::string> dropped;
};

/// Loads a numeric CSV with a header row.  The response column becomes y,
/// every other column a main effect (standardized).  Constant columns are
/// dropped with a warning on stderr.  Throws ConfigError for missing
/// columns and ParseError (with row/column location) for malformed cells.
IngestResult ingest_csv(const std::string& path, const std::string& response_column,
                        const std::string& trials_column = "");

}  // namespace shl0
