#include "qsvm/fetch.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>
#include <zlib.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "qsvm/errors.hpp"

namespace qsvm {

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr))
    throw Error("sha256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return sha256_hex(bytes.data(), bytes.size());
}

Manifest read_manifest(const std::string& path) {
  Manifest manifest;
  std::ifstream in(path);
  if (!in) return manifest;  // absent manifest = empty
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string digest, file;
    fields >> digest;
    std::getline(fields, file);
    const auto start = file.find_first_not_of(" \t");
    if (digest.size() != 64 || start == std::string::npos)
      throw ValidationError(path + ": malformed manifest line '" + line + "'");
    manifest[file.substr(start)] = digest;
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& [file, digest] : manifest) out << digest << "  " << file << "\n";
  if (!out.flush()) throw IoError("write failed for " + path);
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& compressed) {
  z_stream zs{};
  // 16 + MAX_WBITS: gzip wrapper
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw Error("zlib init failed");
  std::vector<unsigned char> out;
  out.resize(compressed.size() * 4 + 1024);
  zs.next_in = const_cast<unsigned char*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::size_t written = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (written == out.size()) out.resize(out.size() * 2);
    zs.next_out = out.data() + written;
    zs.avail_out = static_cast<uInt>(out.size() - written);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IoError("gzip payload is corrupt (zlib rc " + std::to_string(rc) + ")");
    }
    written = out.size() - zs.avail_out;
  }
  inflateEnd(&zs);
  out.resize(written);
  return out;
}

namespace {

struct PlannedItem : FetchItem {
  std::string pinned_sha256;  // digest of the raw payload, empty when unpinned
};

std::vector<PlannedItem> plan(const std::string& dataset) {
  // Canonical public copies. The mnist payload digests are pinned to the
  // well-known distribution archives; the UCI text files are
  // trust-on-first-use and recorded into the manifest.
  if (dataset == "iris")
    return {{{"https://archive.ics.uci.edu/ml/machine-learning-databases/iris/iris.data",
              "iris.csv", false},
             ""}};
  if (dataset == "sonar")
    return {{{"https://archive.ics.uci.edu/ml/machine-learning-databases/undocumented/"
              "connectionist-bench/sonar/sonar.all-data",
              "sonar.csv", false},
             ""}};
  if (dataset == "mnist")
    return {{{"https://storage.googleapis.com/cvdf-datasets/mnist/train-images-idx3-ubyte.gz",
              "mnist/train-images-idx3-ubyte", true},
             "440fcabf73cc546fa21475e81ea370265605f56be210a4024d2ca8f203523609"},
            {{"https://storage.googleapis.com/cvdf-datasets/mnist/train-labels-idx1-ubyte.gz",
              "mnist/train-labels-idx1-ubyte", true},
             "3552534a0a558bbed6aed32b30c495cca23d567ec52cac8be1a0730e8010255c"}};
  throw ValidationError("unknown dataset '" + dataset + "' (expected iris, sonar or mnist)");
}

std::vector<unsigned char> http_get(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("bad URL: " + url);
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  auto res = client.Get(path);
  if (!res) throw IoError("download failed for " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw IoError("download failed for " + url + ": HTTP " + std::to_string(res->status));
  return {res->body.begin(), res->body.end()};
}

}  // namespace

std::vector<FetchItem> fetch_plan(const std::string& dataset) {
  std::vector<FetchItem> items;
  for (const auto& p : plan(dataset)) items.push_back(p);
  return items;
}

void fetch_datasets(const std::string& dataset, const std::string& data_dir,
                    bool update_manifest) {
  namespace fs = std::filesystem;
  const std::string manifest_path = data_dir + "/MANIFEST.sha256";
  Manifest manifest = read_manifest(manifest_path);
  bool manifest_dirty = false;

  for (const PlannedItem& item : plan(dataset)) {
    std::cout << "fetching " << item.url << "\n";
    std::vector<unsigned char> payload = http_get(item.url);
    if (!item.pinned_sha256.empty()) {
      const std::string got = sha256_hex(payload.data(), payload.size());
      if (got != item.pinned_sha256)
        throw IoError("checksum mismatch for " + item.url + ": expected " + item.pinned_sha256 +
                      ", got " + got);
    }
    if (item.gzipped) payload = gunzip(payload);

    const std::string digest = sha256_hex(payload.data(), payload.size());
    const auto known = manifest.find(item.target);
    if (known != manifest.end() && known->second != digest && !update_manifest)
      throw IoError("manifest mismatch for " + item.target + ": expected " + known->second +
                    ", downloaded " + digest + " (pass --update to accept)");

    const fs::path out_path = fs::path(data_dir) / item.target;
    fs::create_directories(out_path.parent_path());
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open " + out_path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out.flush()) throw IoError("write failed for " + out_path.string());

    if (known == manifest.end() || known->second != digest) {
      manifest[item.target] = digest;
      manifest_dirty = true;
      std::cout << "recorded sha256 " << digest << "  " << item.target << "\n";
    } else {
      std::cout << "verified sha256 " << digest << "  " << item.target << "\n";
    }
  }
  if (manifest_dirty) write_manifest(manifest, manifest_path);
}

}  // namespace qsvm
