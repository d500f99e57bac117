#include "stua/checkpoint.hpp"

#include "stua/csv_io.hpp"
#include "stua/errors.hpp"

#include <cstdio>
#include <sstream>

namespace stua::checkpoint {

void save(const std::filesystem::path& path, const model::ModelParams& params, const Metadata& meta) {
  std::string out = "stua-checkpoint " + std::to_string(kFormatVersion) + "\n";
  for (const auto& [key, value] : meta) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
      fail(ErrorKind::Checkpoint, "metadata key or value contains a separator: " + key);
    }
    out += "meta " + key + " " + value + "\n";
  }
  char buf[32];
  model::visit_params(params, [&](const std::string&, const std::string& name, const Matrix& m) {
    out += "tensor " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
        if (c > 0) out += ' ';
        out += buf;
      }
      out += '\n';
    }
  });
  out += "end\n";
  io::write_file_atomic(path, out);
}

Metadata load(const std::filesystem::path& path, model::ModelParams& params) {
  std::istringstream in(io::read_file(path));
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "stua-checkpoint") fail(ErrorKind::Checkpoint, "not a checkpoint file: " + path.string());
  if (version != kFormatVersion) fail(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version));

  Metadata meta;
  std::map<std::string, Matrix> tensors;
  std::string word;
  bool ended = false;
  while (in >> word) {
    if (word == "meta") {
      std::string key, value;
      in >> key;
      std::getline(in, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      meta[key] = value;
    } else if (word == "tensor") {
      std::string name;
      Eigen::Index rows = 0, cols = 0;
      if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0) fail(ErrorKind::Checkpoint, "bad tensor header");
      Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          if (!(in >> word)) fail(ErrorKind::Checkpoint, "truncated tensor " + name);
          try {
            m(r, c) = io::parse_double(word, name);
          } catch (const Error&) {
            fail(ErrorKind::Checkpoint, "bad value in tensor " + name + ": " + word);
          }
        }
      }
      if (!tensors.emplace(name, std::move(m)).second) fail(ErrorKind::Checkpoint, "duplicate tensor " + name);
    } else if (word == "end") {
      ended = true;
      break;
    } else {
      fail(ErrorKind::Checkpoint, "unexpected token " + word);
    }
  }
  if (!ended) fail(ErrorKind::Checkpoint, "checkpoint is missing its end marker");

  model::visit_params(params, [&](const std::string&, const std::string& name, Matrix& m) {
    auto it = tensors.find(name);
    if (it == tensors.end()) fail(ErrorKind::Checkpoint, "missing tensor " + name);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols()) {
      fail(ErrorKind::Checkpoint, "shape mismatch for tensor " + name);
    }
    m = it->second;
    tensors.erase(it);
  });
  if (!tensors.empty()) fail(ErrorKind::Checkpoint, "unknown tensor " + tensors.begin()->first);
  return meta;
}

}  // namespace stua::checkpoint
