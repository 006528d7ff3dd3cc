#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcanatomy/quarter.hpp"

namespace pcanatomy {

using Cell = std::optional<double>;
/// One value per (unit, quarter), unit-major: index = unit*n_quarters + q.
using Column = std::vector<Cell>;

/// Rectangular MSA x quarter panel. The quarter index is contiguous between
/// its first and last quarter; every column covers the full index with
/// missing cells where no observation exists. Columns are append-only:
/// adding a derived column never touches an existing one, so a constructed
/// dataset is safe for concurrent reads.
class PanelDataset {
 public:
  PanelDataset(std::vector<std::string> units, Quarter first, int n_quarters);

  int n_units() const { return static_cast<int>(units_.size()); }
  int n_quarters() const { return n_quarters_; }
  std::size_t n_cells() const { return units_.size() * static_cast<std::size_t>(n_quarters_); }

  const std::vector<std::string>& units() const { return units_; }
  Quarter first_quarter() const { return first_; }
  Quarter last_quarter() const { return first_ + (n_quarters_ - 1); }
  Quarter quarter_at(int pos) const { return first_ + pos; }

  /// Position of t in the quarter index, or -1 if outside it.
  int quarter_pos(Quarter t) const;
  /// Position of a unit id, or -1 if unknown.
  int unit_pos(const std::string& id) const;

  std::size_t cell_index(int unit, int qpos) const {
    return static_cast<std::size_t>(unit) * n_quarters_ + qpos;
  }

  bool has_column(const std::string& name) const;
  /// Throws DataError naming the column if absent.
  const Column& column(const std::string& name) const;
  /// Throws DataError on name collision or size mismatch.
  void add_column(const std::string& name, Column values);
  /// Column names in insertion order.
  const std::vector<std::string>& column_names() const { return order_; }

 private:
  std::vector<std::string> units_;
  Quarter first_;
  int n_quarters_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, Column> columns_;
  std::unordered_map<std::string, int> unit_index_;
};

struct ColumnStats {
  long long count = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd; 0 when count < 2
  double min = 0.0;
  double max = 0.0;
};

/// Per-column descriptive statistics over the full sample and the two
/// halves split at a quarter (pre: t < split, post: t >= split).
struct SummaryStats {
  struct Row {
    std::string column;
    ColumnStats full, pre, post;
  };
  Quarter split;
  std::vector<Row> rows;
};

/// Statistics over non-missing cells of the named columns (all columns when
/// the list is empty). The split must lie within the quarter index.
SummaryStats summary_stats(const PanelDataset& data, Quarter split,
                           const std::vector<std::string>& columns = {});

}  // namespace pcanatomy
