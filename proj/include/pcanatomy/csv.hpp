#pragma once

#include <string>
#include <vector>

#include "pcanatomy/panel.hpp"

namespace pcanatomy {

/// Column set the estimation pipeline ingests: msa_id and quarter are keys,
/// the rest are data columns. Extra columns in a file are kept.
inline const std::vector<std::string> kIngestSchema = {"CPI_core", "CPI", "vu", "shift_share"};

/// Reads a UTF-8, comma-delimited panel CSV. The header must contain msa_id,
/// quarter and every column in `schema`. The quarter index spans the min..max
/// quarters seen; absent rows leave missing cells. Duplicate (msa, quarter)
/// rows and unparseable numeric cells are DataErrors reported with the row
/// number. Empty cells are missing values.
PanelDataset load_csv(const std::string& path, const std::vector<std::string>& schema = kIngestSchema);

/// Writes all columns in insertion order; missing cells become empty fields.
/// Values round-trip exactly through load_csv.
void write_csv(const PanelDataset& data, const std::string& path);

}  // namespace pcanatomy
