#pragma once

#include <map>
#include <string>
#include <vector>

namespace qsvm {

// Hex-encoded SHA-256 of a byte buffer / file.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::string& path);

// "<sha256>  <relative path>" lines; '#' comments allowed.
using Manifest = std::map<std::string, std::string>;  // path -> hex digest

Manifest read_manifest(const std::string& path);
void write_manifest(const Manifest& manifest, const std::string& path);

struct FetchItem {
  std::string url;
  std::string target;    // path relative to the data directory
  bool gzipped = false;  // payload is gzip-compressed and must be inflated
};

// The canonical download set for one of {iris, sonar, mnist}.
std::vector<FetchItem> fetch_plan(const std::string& dataset);

// Downloads each item into data_dir and verifies it against the manifest
// entry when one exists. Missing entries are recorded (and reported) so later
// fetches verify; a digest mismatch is an error unless `update_manifest`.
// Requires TLS support; throws IoError on network failure.
void fetch_datasets(const std::string& dataset, const std::string& data_dir,
                    bool update_manifest);

// gzip (RFC 1952) inflate of a whole buffer.
std::vector<unsigned char> gunzip(const std::vector<unsigned char>& compressed);

}  // namespace qsvm
