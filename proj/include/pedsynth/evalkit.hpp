#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "pedsynth/errors.hpp"

namespace pedsynth {

struct EvalInput {
    std::size_t n_query = 0;
    std::size_t n_gallery = 0;
    std::vector<double> distmat; // row-major query x gallery, smaller = closer
    std::vector<int> query_ids, query_cams;
    std::vector<int> gallery_ids, gallery_cams;

    double dist(std::size_t q, std::size_t g) const { return distmat[q * n_gallery + g]; }

    void validate() const {
        if (distmat.size() != n_query * n_gallery)
            throw ValidationError("distance matrix size mismatch");
        if (query_ids.size() != n_query || query_cams.size() != n_query)
            throw ValidationError("query id/cam size mismatch");
        if (gallery_ids.size() != n_gallery || gallery_cams.size() != n_gallery)
            throw ValidationError("gallery id/cam size mismatch");
    }
};

struct EvalResult {
    std::vector<double> cmc; // rank-k accuracy, k = 1..n_gallery
    double map = 0.0;
    int valid_queries = 0;
    int skipped_queries = 0; // no cross-camera match in the gallery
};

// Single-query CMC and mAP under the standard cross-camera protocol:
// gallery items sharing both id and camera with the query are excluded,
// ties broken by lower gallery index. Queries left without any correct
// match are skipped and counted.
inline EvalResult evaluate(const EvalInput& input) {
    input.validate();
    EvalResult result;
    result.cmc.assign(input.n_gallery, 0.0);

    std::vector<std::size_t> order(input.n_gallery);
    double ap_sum = 0.0;
    for (std::size_t q = 0; q < input.n_query; ++q) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return input.dist(q, a) < input.dist(q, b);
        });
        long rank = 0;       // position among kept gallery items, 1-based
        long first_match = 0;
        long matches = 0;
        double ap = 0.0;
        for (std::size_t g : order) {
            const bool same_id = input.gallery_ids[g] == input.query_ids[q];
            if (same_id && input.gallery_cams[g] == input.query_cams[q]) continue; // junk
            ++rank;
            if (same_id) {
                ++matches;
                ap += double(matches) / double(rank); // precision at this match
                if (first_match == 0) first_match = rank;
            }
        }
        if (matches == 0) {
            ++result.skipped_queries;
            continue;
        }
        ++result.valid_queries;
        ap_sum += ap / double(matches);
        for (std::size_t k = std::size_t(first_match) - 1; k < input.n_gallery; ++k)
            result.cmc[k] += 1.0;
    }
    if (result.valid_queries == 0)
        throw ValidationError("no query has a valid cross-camera gallery match");
    for (double& v : result.cmc) v /= double(result.valid_queries);
    result.map = ap_sum / double(result.valid_queries);
    return result;
}

// --- flat-file exchange ---------------------------------------------------------
//
// Distance matrix: two little-endian int64 dims followed by row-major
// float64 values. Id/cam lists: CSV lines `id,cam`.

inline void write_distmat(const std::vector<double>& distmat, std::size_t rows,
                          std::size_t cols, const std::string& path) {
    if (distmat.size() != rows * cols) throw ValidationError("distance matrix size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::int64_t dims[2] = {std::int64_t(rows), std::int64_t(cols)};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    out.write(reinterpret_cast<const char*>(distmat.data()),
              std::streamsize(distmat.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<double> read_distmat(const std::string& path, std::size_t& rows,
                                        std::size_t& cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open distance matrix: " + path);
    std::int64_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in || dims[0] < 0 || dims[1] < 0)
        throw ParseError("bad distance matrix header: " + path);
    rows = std::size_t(dims[0]);
    cols = std::size_t(dims[1]);
    std::vector<double> data(rows * cols);
    in.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
    if (!in) throw ParseError("truncated distance matrix: " + path);
    return data;
}

inline void read_id_cam_csv(const std::string& path, std::vector<int>& ids,
                            std::vector<int>& cams) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open id/cam list: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected `id,cam`");
        try {
            ids.push_back(std::stoi(line.substr(0, comma)));
            cams.push_back(std::stoi(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed integer");
        }
    }
}

// Summary line in the usual re-id reporting style: percentages at 0.1 resolution.
inline std::string format_result(const EvalResult& r) {
    auto pct = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
        return std::string(buf);
    };
    auto rank = [&](std::size_t k) {
        return k <= r.cmc.size() ? r.cmc[k - 1] : (r.cmc.empty() ? 0.0 : r.cmc.back());
    };
    return "rank-1 " + pct(rank(1)) + " rank-5 " + pct(rank(5)) + " rank-10 " + pct(rank(10)) +
           " mAP " + pct(r.map);
}

} // namespace pedsynth
