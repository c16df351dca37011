#include "quantcal/datasim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "quantcal/binary_io.hpp"

namespace quantcal {

void write_tensor(std::ostream& os, const Tensor& t) {
  binio::write_bytes(os, "QTNS");
  binio::write_u32(os, kTensorFileVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) binio::write_u32(os, static_cast<std::uint32_t>(d));
  for (double v : t.data()) binio::write_f64(os, v);
  if (!os) throw IoError("failed writing tensor");
}

Tensor read_tensor(std::istream& is) {
  binio::expect_magic(is, "QTNS", "tensor file");
  const auto version = binio::read_u32(is, "tensor version");
  if (version != kTensorFileVersion) throw IoError("unsupported tensor file version " + std::to_string(version));
  const auto rank = binio::read_u32(is, "tensor rank");
  if (rank > 8) throw IoError("tensor file: implausible rank");
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(binio::read_u32(is, "tensor dims"));
  std::vector<double> data(shape_size(shape));
  for (auto& v : data) v = binio::read_f64(is, "tensor payload");
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open tensor file " + path.string());
  return read_tensor(is);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw IoError("format_double failed");
  return std::string(buf, end);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "sample_id,x_path,y_path,forward_model,param,split\n";
  for (const auto& r : rows) {
    os << r.sample_id << ',' << r.x_path << ',' << r.y_path << ',' << r.forward_model << ','
       << format_double(r.param) << ',' << split_name(r.split) << '\n';
  }
  if (!os) throw IoError("failed writing manifest " + path.string());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != "sample_id,x_path,y_path,forward_model,param,split") {
    throw IoError("manifest " + path.string() + " has an unexpected header");
  }
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw IoError("manifest line " + std::to_string(line_no) + ": expected 6 fields");
    try {
      rows.push_back({std::stoull(f[0]), f[1], f[2], f[3], std::stod(f[4]), parse_split(f[5])});
    } catch (const std::logic_error&) {
      throw IoError("manifest line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace quantcal
