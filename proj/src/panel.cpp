#include "pcanatomy/panel.hpp"

#include <algorithm>
#include <cmath>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

PanelDataset::PanelDataset(std::vector<std::string> units, Quarter first, int n_quarters)
    : units_(std::move(units)), first_(first), n_quarters_(n_quarters) {
  if (units_.empty()) throw DataError("PanelDataset: no units");
  if (n_quarters_ <= 0) throw DataError("PanelDataset: empty quarter index");
  for (int i = 0; i < static_cast<int>(units_.size()); ++i) {
    auto [it, fresh] = unit_index_.emplace(units_[i], i);
    if (!fresh) throw DataError("PanelDataset: duplicate unit id '" + units_[i] + "'");
  }
}

int PanelDataset::quarter_pos(Quarter t) const {
  int pos = t - first_;
  return (pos >= 0 && pos < n_quarters_) ? pos : -1;
}

int PanelDataset::unit_pos(const std::string& id) const {
  auto it = unit_index_.find(id);
  return it == unit_index_.end() ? -1 : it->second;
}

bool PanelDataset::has_column(const std::string& name) const {
  return columns_.count(name) != 0;
}

const Column& PanelDataset::column(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw DataError("no such column '" + name + "'");
  return it->second;
}

void PanelDataset::add_column(const std::string& name, Column values) {
  if (columns_.count(name)) throw DataError("column '" + name + "' already exists");
  if (values.size() != n_cells()) {
    throw DataError("column '" + name + "': expected " + std::to_string(n_cells()) +
                    " cells, got " + std::to_string(values.size()));
  }
  order_.push_back(name);
  columns_.emplace(name, std::move(values));
}

namespace {

struct Accum {
  long long count = 0;
  double sum = 0.0, sumsq = 0.0;
  double min = 0.0, max = 0.0;

  void add(double v) {
    if (count == 0) { min = max = v; }
    else { min = std::min(min, v); max = std::max(max, v); }
    ++count;
    sum += v;
    sumsq += v * v;
  }
  ColumnStats finish() const {
    ColumnStats s;
    s.count = count;
    if (count == 0) return s;
    s.mean = sum / count;
    if (count > 1) {
      double ss = sumsq - sum * sum / count;
      s.sd = std::sqrt(std::max(0.0, ss / (count - 1)));
    }
    s.min = min;
    s.max = max;
    return s;
  }
};

}  // namespace

SummaryStats summary_stats(const PanelDataset& data, Quarter split,
                           const std::vector<std::string>& columns) {
  if (data.quarter_pos(split) < 0) {
    throw DataError("summary_stats: split " + split.str() + " outside quarter index " +
                    data.first_quarter().str() + ".." + data.last_quarter().str());
  }
  const std::vector<std::string>& names = columns.empty() ? data.column_names() : columns;
  SummaryStats out;
  out.split = split;
  int split_pos = data.quarter_pos(split);
  for (const auto& name : names) {
    const Column& col = data.column(name);
    Accum full, pre, post;
    for (int u = 0; u < data.n_units(); ++u) {
      for (int t = 0; t < data.n_quarters(); ++t) {
        const Cell& c = col[data.cell_index(u, t)];
        if (!c) continue;
        full.add(*c);
        (t < split_pos ? pre : post).add(*c);
      }
    }
    out.rows.push_back({name, full.finish(), pre.finish(), post.finish()});
  }
  return out;
}

}  // namespace pcanatomy
