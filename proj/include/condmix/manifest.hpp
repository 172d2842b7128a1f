#pragma once

#include <string>

#include <json.hpp>

namespace condmix {

// Reproducibility record for a CLI run: input digests, every hyperparameter,
// selected thresholds, seeds and the tool version. Re-running with the same
// manifest reproduces outputs byte for byte; the manifest digest is stamped
// into every file the run writes.
class RunManifest {
 public:
  explicit RunManifest(const std::string& command);

  void add_input(const std::string& role, const std::string& path,
                 const std::string& content);
  void set_param(const std::string& key, const nlohmann::json& value);

  std::string digest() const;       // fnv1a-64 over the canonical dump
  std::string digest_comment() const;  // "# manifest: <hex>"
  std::string dump() const;
  const nlohmann::json& doc() const noexcept { return doc_; }

 private:
  nlohmann::json doc_;
};

}  // namespace condmix
