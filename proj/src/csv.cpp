#include "pcanatomy/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pcanatomy/errors.hpp"

namespace pcanatomy {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

Cell parse_cell(const std::string& text, const std::string& column, long line_no) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + text.size()) {
    throw DataError("row " + std::to_string(line_no) + ": cannot parse '" + text +
                    "' in column '" + column + "' as a number");
  }
  return v;
}

}  // namespace

PanelDataset load_csv(const std::string& path, const std::vector<std::string>& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  std::vector<std::string> header = split_line(line);

  std::unordered_map<std::string, int> col_of;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) col_of.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it == col_of.end()) throw DataError(path + ": required column '" + name + "' missing");
    return it->second;
  };
  int msa_col = require("msa_id");
  int quarter_col = require("quarter");
  for (const auto& name : schema) require(name);

  // Data columns: every header field except the two keys, in file order.
  std::vector<std::string> data_cols;
  for (const auto& name : header) {
    if (name != "msa_id" && name != "quarter") data_cols.push_back(name);
  }

  struct Row {
    int unit;
    Quarter t;
    std::vector<Cell> values;
  };
  std::vector<Row> rows;
  std::vector<std::string> units;
  std::unordered_map<std::string, int> unit_of;
  std::set<std::pair<int, int>> seen;
  Quarter qmin, qmax;
  bool any = false;

  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    const std::string& msa = fields[msa_col];
    if (msa.empty()) throw DataError(path + ": row " + std::to_string(line_no) + ": empty msa_id");
    Quarter t;
    try {
      t = Quarter::parse(fields[quarter_col]);
    } catch (const DataError& e) {
      throw DataError(path + ": row " + std::to_string(line_no) + ": " + e.what());
    }

    auto [uit, fresh] = unit_of.emplace(msa, static_cast<int>(units.size()));
    if (fresh) units.push_back(msa);
    int unit = uit->second;
    if (!seen.insert({unit, t.index()}).second) {
      throw DataError(path + ": row " + std::to_string(line_no) + ": duplicate key (" + msa +
                      ", " + t.str() + ")");
    }

    Row row;
    row.unit = unit;
    row.t = t;
    row.values.reserve(data_cols.size());
    for (const auto& name : data_cols) {
      try {
        row.values.push_back(parse_cell(fields[col_of[name]], name, line_no));
      } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
      }
    }
    rows.push_back(std::move(row));

    if (!any) { qmin = qmax = t; any = true; }
    else { qmin = std::min(qmin, t); qmax = std::max(qmax, t); }
  }
  if (!any) throw DataError(path + ": no data rows");

  PanelDataset data(std::move(units), qmin, qmax - qmin + 1);
  std::vector<Column> cols(data_cols.size(), Column(data.n_cells()));
  for (const auto& row : rows) {
    std::size_t idx = data.cell_index(row.unit, data.quarter_pos(row.t));
    for (std::size_t c = 0; c < data_cols.size(); ++c) cols[c][idx] = row.values[c];
  }
  for (std::size_t c = 0; c < data_cols.size(); ++c) {
    data.add_column(data_cols[c], std::move(cols[c]));
  }
  return data;
}

void write_csv(const PanelDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "msa_id,quarter";
  for (const auto& name : data.column_names()) out << ',' << name;
  out << '\n';

  char buf[40];
  for (int u = 0; u < data.n_units(); ++u) {
    for (int t = 0; t < data.n_quarters(); ++t) {
      out << data.units()[u] << ',' << data.quarter_at(t).str();
      for (const auto& name : data.column_names()) {
        const Cell& c = data.column(name)[data.cell_index(u, t)];
        out << ',';
        if (c) {
          std::snprintf(buf, sizeof(buf), "%.17g", *c);
          out << buf;
        }
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace pcanatomy
