#include "pme/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace pme::io
{

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token)
{
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
  {
    throw IoError("bad number '" + std::string(token) + "'");
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view data)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : data)
  {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h)
{
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i)
  {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

namespace
{

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
  {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  f << text;
  if (!f)
  {
    throw IoError("failed writing " + path.string());
  }
}

std::vector<Eigen::VectorXd> parse_rows(const std::filesystem::path& path)
{
  std::ifstream f(path);
  if (!f)
  {
    throw IoError("cannot open " + path.string());
  }
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  while (std::getline(f, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size())
    {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos)
      {
        next = line.size();
      }
      vals.push_back(parse_double(std::string_view(line).substr(pos, next - pos)));
      pos = next + 1;
      if (next == line.size())
      {
        break;
      }
    }
    rows.emplace_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  return rows;
}

std::string rows_to_string(const std::vector<Eigen::VectorXd>& rows)
{
  std::string out;
  std::size_t n = 0;
  for (const auto& r : rows)
  {
    n += static_cast<std::size_t>(r.size()) * 24 + 2;
  }
  out.reserve(n);
  char buf[64];
  for (const auto& r : rows)
  {
    for (Eigen::Index j = 0; j < r.size(); ++j)
    {
      if (j > 0)
      {
        out += ',';
      }
      const auto res = std::to_chars(buf, buf + sizeof(buf), r(j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m)
{
  std::string out;
  out.reserve(static_cast<std::size_t>(m.rows()) * (static_cast<std::size_t>(m.cols()) * 24 + 2));
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
    {
      if (j > 0)
      {
        out += ',';
      }
      const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  write_text(path, out);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path)
{
  const auto rows = parse_rows(path);
  if (rows.empty())
  {
    return Eigen::MatrixXd(0, 0);
  }
  const Eigen::Index cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    if (rows[i].size() != cols)
    {
      throw IoError(path.string() + ": ragged rows in matrix CSV");
    }
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v)
{
  std::string out;
  out.reserve(static_cast<std::size_t>(v.size()) * 25);
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i)
  {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v(i));
    out.append(buf, res.ptr);
    out += '\n';
  }
  write_text(path, out);
}

Eigen::VectorXd read_vector_csv(const std::filesystem::path& path)
{
  const auto rows = parse_rows(path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    if (rows[i].size() != 1)
    {
      throw IoError(path.string() + ": expected one value per line");
    }
    v(static_cast<Eigen::Index>(i)) = rows[i](0);
  }
  return v;
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& rows)
{
  write_text(path, rows_to_string(rows));
}

std::vector<Eigen::VectorXd> read_rows_csv(const std::filesystem::path& path)
{
  return parse_rows(path);
}

nlohmann::json read_json(const std::filesystem::path& path)
{
  std::ifstream f(path);
  if (!f)
  {
    throw IoError("cannot open " + path.string());
  }
  try
  {
    return nlohmann::json::parse(f);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
  write_text(path, j.dump(2) + "\n");
}

}  // namespace pme::io
