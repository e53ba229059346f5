#include "frlab/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace frlab {

void Checkpoint::add(const std::string& name, const float* data, std::vector<int> shape) {
  if (index_.count(name)) throw std::runtime_error("checkpoint: duplicate tensor " + name);
  Entry e;
  e.name = name;
  e.shape = std::move(shape);
  size_t n = 1;
  for (int d : e.shape) n *= static_cast<size_t>(d);
  e.data.assign(data, data + n);
  index_[name] = entries_.size();
  entries_.push_back(std::move(e));
}

void Checkpoint::add(const std::string& name, const Eigen::VectorXf& v) {
  add(name, v.data(), {static_cast<int>(v.size())});
}

void Checkpoint::add(const std::string& name, const Eigen::MatrixXf& m) {
  add(name, m.data(), {static_cast<int>(m.rows()), static_cast<int>(m.cols())});
}

void Checkpoint::add_scalar(const std::string& name, double v) {
  float f = static_cast<float>(v);
  add(name, &f, {1});
}

void Checkpoint::add_raw_doubles(const std::string& name, const std::vector<double>& v) {
  std::vector<float> words(v.size() * 2);
  std::memcpy(words.data(), v.data(), v.size() * sizeof(double));
  add(name, words.data(), {static_cast<int>(words.size())});
}

void Checkpoint::add_raw_u64(const std::string& name, const std::vector<uint64_t>& v) {
  std::vector<float> words(v.size() * 2);
  std::memcpy(words.data(), v.data(), v.size() * sizeof(uint64_t));
  add(name, words.data(), {static_cast<int>(words.size())});
}

bool Checkpoint::has(const std::string& name) const { return index_.count(name) > 0; }

const Checkpoint::Entry& Checkpoint::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::runtime_error("checkpoint: missing tensor " + name);
  return entries_[it->second];
}

Eigen::VectorXf Checkpoint::get_vector(const std::string& name) const {
  const Entry& e = get(name);
  Eigen::VectorXf v(static_cast<int>(e.data.size()));
  std::memcpy(v.data(), e.data.data(), e.data.size() * sizeof(float));
  return v;
}

double Checkpoint::get_scalar(const std::string& name) const { return get(name).data.at(0); }

std::vector<double> Checkpoint::get_raw_doubles(const std::string& name) const {
  const Entry& e = get(name);
  std::vector<double> v(e.data.size() / 2);
  std::memcpy(v.data(), e.data.data(), v.size() * sizeof(double));
  return v;
}

std::vector<uint64_t> Checkpoint::get_raw_u64(const std::string& name) const {
  const Entry& e = get(name);
  std::vector<uint64_t> v(e.data.size() / 2);
  std::memcpy(v.data(), e.data.data(), v.size() * sizeof(uint64_t));
  return v;
}

void Checkpoint::save(const std::string& path) const {
  std::ostringstream manifest;
  manifest << "FRLAB-CKPT v" << kFormatVersion << "\n";
  size_t offset = 0;
  for (const Entry& e : entries_) {
    manifest << "tensor " << e.name;
    manifest << " " << e.shape.size();
    for (int d : e.shape) manifest << " " << d;
    manifest << " f32 " << offset << "\n";
    offset += e.data.size() * sizeof(float);
  }
  manifest << "data " << offset << "\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  std::string header = manifest.str();
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Entry& e : entries_) {
    out.write(reinterpret_cast<const char*>(e.data.data()),
              static_cast<std::streamsize>(e.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: empty file " + path);
  std::istringstream magic(line);
  std::string tag, version;
  magic >> tag >> version;
  if (tag != "FRLAB-CKPT")
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (version != "v" + std::to_string(kFormatVersion))
    throw std::runtime_error("checkpoint: unsupported format version " + version + " in " + path);

  struct Pending {
    std::string name;
    std::vector<int> shape;
    size_t offset;
  };
  std::vector<Pending> pending;
  size_t total_bytes = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "tensor") {
      Pending p;
      int ndims = 0;
      std::string dtype;
      ls >> p.name >> ndims;
      p.shape.resize(ndims);
      for (int i = 0; i < ndims; ++i) ls >> p.shape[i];
      ls >> dtype >> p.offset;
      if (!ls || dtype != "f32")
        throw std::runtime_error("checkpoint: corrupt manifest line: " + line);
      pending.push_back(std::move(p));
    } else if (kind == "data") {
      ls >> total_bytes;
      break;
    } else {
      throw std::runtime_error("checkpoint: corrupt manifest line: " + line);
    }
  }
  std::vector<char> payload(total_bytes);
  in.read(payload.data(), static_cast<std::streamsize>(total_bytes));
  if (static_cast<size_t>(in.gcount()) != total_bytes)
    throw std::runtime_error("checkpoint: truncated payload in " + path);

  Checkpoint ckpt;
  for (const Pending& p : pending) {
    size_t n = 1;
    for (int d : p.shape) n *= static_cast<size_t>(d);
    if (p.offset + n * sizeof(float) > total_bytes)
      throw std::runtime_error("checkpoint: tensor " + p.name + " outside payload");
    ckpt.add(p.name, reinterpret_cast<const float*>(payload.data() + p.offset), p.shape);
  }
  return ckpt;
}

}  // namespace frlab
