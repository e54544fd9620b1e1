#include "mocp/csv.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace mocp {

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    out.push_back(field);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

std::string trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& raw, std::size_t line_no)
{
  const std::string s = trim(raw);
  double v = 0.0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw InvalidData("line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
  return v;
}

// "x12" -> 12, or -1 when the name does not follow the schema
long column_index(const std::string& name, char prefix)
{
  if (name.size() < 2 || name[0] != prefix)
    return -1;
  long idx = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
  if (ec != std::errc() || ptr != name.data() + name.size() || idx < 0)
    return -1;
  return idx;
}

} // namespace

Dataset read_dataset_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw InvalidData("empty CSV input");
  auto header = split_fields(line);

  std::vector<long> x_col(header.size(), -1), y_col(header.size(), -1);
  long p = 0, d = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (auto i = column_index(name, 'x'); i >= 0) {
      x_col[c] = i;
      p = std::max(p, i + 1);
    } else if (auto j = column_index(name, 'y'); j >= 0) {
      y_col[c] = j;
      d = std::max(d, j + 1);
    } else {
      throw InvalidData("unexpected CSV column '" + name + "'");
    }
  }
  if (d == 0)
    throw InvalidData("CSV has no target columns");
  std::vector<int> seen_x(static_cast<std::size_t>(p), 0), seen_y(static_cast<std::size_t>(d), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (x_col[c] >= 0)
      ++seen_x[static_cast<std::size_t>(x_col[c])];
    if (y_col[c] >= 0)
      ++seen_y[static_cast<std::size_t>(y_col[c])];
  }
  for (int s : seen_x)
    if (s != 1)
      throw InvalidData("feature columns must be exactly x0..x{p-1}");
  for (int s : seen_y)
    if (s != 1)
      throw InvalidData("target columns must be exactly y0..y{d-1}");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw InvalidData("line " + std::to_string(line_no) + ": wrong field count");
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row[c] = parse_double(fields[c], line_no);
    rows.push_back(std::move(row));
  }

  Dataset data;
  data.x.resize(static_cast<Index>(rows.size()), p);
  data.y.resize(static_cast<Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (x_col[c] >= 0)
        data.x(static_cast<Index>(r), x_col[c]) = rows[r][c];
      else
        data.y(static_cast<Index>(r), y_col[c]) = rows[r][c];
    }
  for (long i = 0; i < p; ++i)
    data.feature_names.push_back("x" + std::to_string(i));
  for (long j = 0; j < d; ++j)
    data.target_names.push_back("y" + std::to_string(j));
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidData("cannot open " + path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data)
{
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  bool first = true;
  for (Index i = 0; i < data.p(); ++i, first = false)
    out << (first ? "" : ",") << 'x' << i;
  for (Index j = 0; j < data.d(); ++j, first = false)
    out << (first ? "" : ",") << 'y' << j;
  out << '\n';
  for (Index r = 0; r < data.n(); ++r) {
    first = true;
    for (Index i = 0; i < data.p(); ++i, first = false)
      out << (first ? "" : ",") << data.x(r, i);
    for (Index j = 0; j < data.d(); ++j, first = false)
      out << (first ? "" : ",") << data.y(r, j);
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data)
{
  std::ofstream out(path);
  if (!out)
    throw InvalidData("cannot write " + path);
  write_dataset_csv(out, data);
}

} // namespace mocp
