#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

namespace frlab {

/// Single-file tensor container: a text manifest (format version, then one
/// line per tensor with name, shape, dtype and byte offset) followed by the
/// raw little-endian 32-bit payloads. Saving the same content twice is
/// byte-identical.
class Checkpoint {
 public:
  static constexpr int kFormatVersion = 1;

  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
  };

  void add(const std::string& name, const float* data, std::vector<int> shape);
  void add(const std::string& name, const Eigen::VectorXf& v);
  void add(const std::string& name, const Eigen::MatrixXf& m);
  void add_scalar(const std::string& name, double v);
  /// Bit-exact storage of doubles/integers as pairs of 32-bit words; the
  /// payload is opaque and restored by memcpy, so no precision is lost.
  void add_raw_doubles(const std::string& name, const std::vector<double>& v);
  void add_raw_u64(const std::string& name, const std::vector<uint64_t>& v);

  bool has(const std::string& name) const;
  const Entry& get(const std::string& name) const;
  Eigen::VectorXf get_vector(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  std::vector<double> get_raw_doubles(const std::string& name) const;
  std::vector<uint64_t> get_raw_u64(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

}  // namespace frlab
