#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dqe {

// Shared on-disk container for datasets ("DQE1") and model checkpoints
// ("DQM1"). Layout, all little-endian, no padding:
//
//   bytes 0..3   magic
//   bytes 4..7   format version, uint32
//   bytes 8..15  header length in bytes, uint64
//   header       ASCII metadata block: "key=value" lines followed by
//                "array <name> <rank> <dim...>" lines, one per stored array,
//                in storage order
//   payload      the arrays as raw IEEE-754 binary64, column-major,
//                concatenated in header order
//
// Floating-point metadata values are rendered with shortest round-trip
// formatting, so save -> load -> save reproduces files byte for byte.
class ContainerWriter {
 public:
  ContainerWriter(std::string magic, std::uint32_t version);

  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);
  void set_meta(const std::string& key, std::int64_t value);
  void set_meta_u64(const std::string& key, std::uint64_t value);

  void add_array(const std::string& name, const double* data,
                 std::vector<std::uint64_t> shape);
  void add_vector(const std::string& name, const Eigen::VectorXd& v);
  void add_matrix(const std::string& name, const Eigen::MatrixXd& m);

  void write(const std::string& path) const;

 private:
  struct Array {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;
  };
  std::string magic_;
  std::uint32_t version_;
  std::vector<std::pair<std::string, std::string>> meta_;  // insertion order
  std::vector<Array> arrays_;
};

class ContainerReader {
 public:
  /// Opens and fully validates the file: magic, version, header syntax,
  /// and that the payload size matches the declared shapes exactly.
  ContainerReader(const std::string& path, const std::string& expected_magic,
                  std::uint32_t expected_version);

  bool has_meta(const std::string& key) const;
  const std::string& meta(const std::string& key) const;
  double meta_double(const std::string& key) const;
  std::int64_t meta_int(const std::string& key) const;
  std::uint64_t meta_u64(const std::string& key) const;

  const std::vector<std::string>& array_names() const { return names_; }
  bool has_array(const std::string& name) const;
  const std::vector<std::uint64_t>& shape(const std::string& name) const;

  Eigen::VectorXd vector(const std::string& name) const;
  Eigen::MatrixXd matrix(const std::string& name) const;

 private:
  struct Array {
    std::vector<std::uint64_t> shape;
    std::vector<double> data;
  };
  const Array& find(const std::string& name) const;

  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> names_;
  std::vector<Array> arrays_;
};

/// Shortest round-trip decimal rendering of a double (locale-independent).
std::string format_double(double value);
/// Exact inverse of format_double; throws FormatError on malformed input.
double parse_double(const std::string& text);

}  // namespace dqe
