#include "dqe/container.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dqe/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace dqe {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw FormatError("malformed floating-point value: '" + text + "'");
  return value;
}

namespace {

void check_token(const std::string& s, const char* what) {
  if (s.empty() || s.find('\n') != std::string::npos || s.find('=') != std::string::npos ||
      s.find(' ') != std::string::npos)
    throw std::invalid_argument(std::string("container: invalid ") + what + ": '" + s + "'");
}

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

ContainerWriter::ContainerWriter(std::string magic, std::uint32_t version)
    : magic_(std::move(magic)), version_(version) {
  if (magic_.size() != 4) throw std::invalid_argument("container: magic must be 4 bytes");
}

void ContainerWriter::set_meta(const std::string& key, const std::string& value) {
  check_token(key, "metadata key");
  if (value.find('\n') != std::string::npos)
    throw std::invalid_argument("container: metadata value must be a single line");
  for (auto& kv : meta_)
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  meta_.emplace_back(key, value);
}

void ContainerWriter::set_meta(const std::string& key, double value) {
  set_meta(key, format_double(value));
}

void ContainerWriter::set_meta(const std::string& key, std::int64_t value) {
  set_meta(key, std::to_string(value));
}

void ContainerWriter::set_meta_u64(const std::string& key, std::uint64_t value) {
  set_meta(key, std::to_string(value));
}

void ContainerWriter::add_array(const std::string& name, const double* data,
                                std::vector<std::uint64_t> shape) {
  check_token(name, "array name");
  for (const auto& a : arrays_)
    if (a.name == name) throw std::invalid_argument("container: duplicate array '" + name + "'");
  Array arr;
  arr.name = name;
  arr.shape = std::move(shape);
  arr.data.assign(data, data + element_count(arr.shape));
  arrays_.push_back(std::move(arr));
}

void ContainerWriter::add_vector(const std::string& name, const Eigen::VectorXd& v) {
  add_array(name, v.data(), {static_cast<std::uint64_t>(v.size())});
}

void ContainerWriter::add_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  add_array(name, m.data(),
            {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
}

void ContainerWriter::write(const std::string& path) const {
  std::ostringstream header;
  for (const auto& [k, v] : meta_) header << k << '=' << v << '\n';
  for (const auto& a : arrays_) {
    header << "array " << a.name << ' ' << a.shape.size();
    for (auto d : a.shape) header << ' ' << d;
    header << '\n';
  }
  const std::string head = header.str();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(magic_.data(), 4);
  const std::uint32_t ver = version_;
  out.write(reinterpret_cast<const char*>(&ver), sizeof(ver));
  const std::uint64_t hlen = head.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& a : arrays_)
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  if (!out) throw FormatError("failed writing '" + path + "'");
}

ContainerReader::ContainerReader(const std::string& path, const std::string& expected_magic,
                                 std::uint32_t expected_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");

  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("'" + path + "': truncated before magic");
  if (std::string(magic, 4) != expected_magic)
    throw FormatError("'" + path + "': bad magic '" + std::string(magic, 4) + "', expected '" +
                      expected_magic + "'");
  std::uint32_t version = 0;
  if (!in.read(reinterpret_cast<char*>(&version), sizeof(version)))
    throw FormatError("'" + path + "': truncated before version");
  if (version != expected_version)
    throw FormatError("'" + path + "': unsupported format version " + std::to_string(version));
  std::uint64_t hlen = 0;
  if (!in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen)))
    throw FormatError("'" + path + "': truncated before header length");
  std::string head(hlen, '\0');
  if (!in.read(head.data(), static_cast<std::streamsize>(hlen)))
    throw FormatError("'" + path + "': truncated header");

  std::istringstream hs(head);
  std::string line;
  while (std::getline(hs, line)) {
    if (line.rfind("array ", 0) == 0) {
      std::istringstream ls(line.substr(6));
      std::string name;
      std::size_t rank = 0;
      if (!(ls >> name >> rank)) throw FormatError("'" + path + "': malformed array line");
      Array arr;
      arr.shape.resize(rank);
      for (auto& d : arr.shape)
        if (!(ls >> d)) throw FormatError("'" + path + "': malformed array shape");
      names_.push_back(name);
      arrays_.push_back(std::move(arr));
    } else if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw FormatError("'" + path + "': malformed metadata line '" + line + "'");
      meta_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }

  for (std::size_t i = 0; i < arrays_.size(); ++i) {
    auto& arr = arrays_[i];
    arr.data.resize(element_count(arr.shape));
    if (!in.read(reinterpret_cast<char*>(arr.data.data()),
                 static_cast<std::streamsize>(arr.data.size() * sizeof(double))))
      throw FormatError("'" + path + "': truncated payload in array '" + names_[i] + "'");
  }
  // No padding permitted: the payload must end exactly with the last array.
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("'" + path + "': trailing bytes after the last declared array");
}

bool ContainerReader::has_meta(const std::string& key) const {
  for (const auto& kv : meta_)
    if (kv.first == key) return true;
  return false;
}

const std::string& ContainerReader::meta(const std::string& key) const {
  for (const auto& kv : meta_)
    if (kv.first == key) return kv.second;
  throw FormatError("missing metadata key '" + key + "'");
}

double ContainerReader::meta_double(const std::string& key) const { return parse_double(meta(key)); }

std::int64_t ContainerReader::meta_int(const std::string& key) const {
  const std::string& s = meta(key);
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError("metadata key '" + key + "' is not an integer: '" + s + "'");
  return v;
}

std::uint64_t ContainerReader::meta_u64(const std::string& key) const {
  const std::string& s = meta(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError("metadata key '" + key + "' is not an unsigned integer: '" + s + "'");
  return v;
}

bool ContainerReader::has_array(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

const ContainerReader::Array& ContainerReader::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return arrays_[i];
  throw FormatError("missing array '" + name + "'");
}

const std::vector<std::uint64_t>& ContainerReader::shape(const std::string& name) const {
  return find(name).shape;
}

Eigen::VectorXd ContainerReader::vector(const std::string& name) const {
  const Array& a = find(name);
  if (a.shape.size() != 1)
    throw FormatError("array '" + name + "' has rank " + std::to_string(a.shape.size()) +
                      ", expected 1");
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(), static_cast<Eigen::Index>(a.shape[0]));
}

Eigen::MatrixXd ContainerReader::matrix(const std::string& name) const {
  const Array& a = find(name);
  if (a.shape.size() != 2)
    throw FormatError("array '" + name + "' has rank " + std::to_string(a.shape.size()) +
                      ", expected 2");
  return Eigen::Map<const Eigen::MatrixXd>(a.data.data(), static_cast<Eigen::Index>(a.shape[0]),
                                           static_cast<Eigen::Index>(a.shape[1]));
}

}  // namespace dqe
