// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#include "jslol/datamodel.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <json.hpp>

#include "jslol/errors.hpp"

namespace jslol {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

static_assert(std::numeric_limits<float>::is_iec559, "float32 payload requires IEEE floats");

void write_f32_le(std::ostream& out, const std::vector<double>& values) {
    std::vector<char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        for (int k = 0; k < 4; ++k) {
            buf[i * 4 + k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<double> read_f32_le(const std::filesystem::path& path, std::size_t count) {
    auto in = open_in(path, std::ios::binary);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes != count * 4) {
        throw ValidationError("size mismatch in '" + path.string() + "': header promises " +
                              std::to_string(count * 4) + " bytes, payload has " +
                              std::to_string(bytes));
    }
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (!in) {
        throw IoError("short read from '" + path.string() + "'");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) {
            bits |= static_cast<std::uint32_t>(buf[i * 4 + k]) << (8 * k);
        }
        const float v = std::bit_cast<float>(bits);
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite value at offset " + std::to_string(i) + " in '" +
                                  path.string() + "'");
        }
        values[i] = v;
    }
    return values;
}

struct CubeHeader {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bands = 0;
    double data_max = 1.0;
    bool matrix = false;
};

CubeHeader read_header(const std::filesystem::path& payload) {
    const auto side = sidecar_path(payload);
    if (!std::filesystem::exists(side)) {
        throw ValidationError("missing header '" + side.string() + "'");
    }
    auto in = open_in(side);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed header '" + side.string() + "': " + e.what());
    }
    CubeHeader h;
    try {
        const auto dim = [&](const char* key) {
            const auto v = j.at(key).get<long long>();
            if (v < 0) {
                throw ValidationError(std::string("header field '") + key + "' is negative");
            }
            return static_cast<std::size_t>(v);
        };
        h.width = dim("width");
        h.height = dim("height");
        h.bands = dim("bands");
        h.data_max = j.value("data_max", 1.0);
        h.matrix = j.value("kind", std::string("cube")) == "matrix";
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("invalid header '" + side.string() + "': " + e.what());
    }
    if (h.bands == 0) {
        throw ValidationError("header '" + side.string() + "' declares bands = 0");
    }
    if (!(h.data_max > 0.0) || !std::isfinite(h.data_max)) {
        throw ValidationError("header '" + side.string() + "' declares a non-positive data_max");
    }
    return h;
}

void write_header(const std::filesystem::path& payload, const CubeHeader& h) {
    nlohmann::ordered_json j;
    j["width"] = h.width;
    j["height"] = h.height;
    j["bands"] = h.bands;
    j["data_max"] = h.data_max;
    if (h.matrix) {
        j["kind"] = "matrix";
    }
    auto out = open_out(sidecar_path(payload));
    out << j.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralCube

SpectralCube::SpectralCube(std::size_t width, std::size_t height, std::size_t bands)
    : width_(width), height_(height), bands_(bands), values_(width * height * bands, 0.0) {}

SpectralCube::SpectralCube(std::size_t width, std::size_t height, std::size_t bands,
                           std::vector<double> values)
    : width_(width), height_(height), bands_(bands), values_(std::move(values)) {
    if (values_.size() != width * height * bands) {
        throw ValidationError("cube of " + std::to_string(width) + "x" + std::to_string(height) +
                              "x" + std::to_string(bands) + " needs " +
                              std::to_string(width * height * bands) + " values, got " +
                              std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw ValidationError("cube contains non-finite values");
        }
    }
}

SpectralCube SpectralCube::from_pixels(const Matrix& pixels, std::size_t width,
                                       std::size_t height) {
    if (static_cast<std::size_t>(pixels.cols()) != width * height) {
        throw ValidationError("pixel matrix has " + std::to_string(pixels.cols()) +
                              " columns, expected " + std::to_string(width * height));
    }
    const auto bands = static_cast<std::size_t>(pixels.rows());
    std::vector<double> values(width * height * bands);
    const std::size_t plane = width * height;
    for (std::size_t b = 0; b < bands; ++b) {
        for (std::size_t p = 0; p < plane; ++p) {
            values[b * plane + p] = pixels(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(p));
        }
    }
    return SpectralCube(width, height, bands, std::move(values));
}

double& SpectralCube::at(std::size_t band, std::size_t row, std::size_t col) {
    return values_[band * width_ * height_ + row * width_ + col];
}

double SpectralCube::at(std::size_t band, std::size_t row, std::size_t col) const {
    return values_[band * width_ * height_ + row * width_ + col];
}

Matrix SpectralCube::to_pixels() const {
    const std::size_t plane = width_ * height_;
    Matrix m(static_cast<Eigen::Index>(bands_), static_cast<Eigen::Index>(plane));
    for (std::size_t b = 0; b < bands_; ++b) {
        for (std::size_t p = 0; p < plane; ++p) {
            m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(p)) = values_[b * plane + p];
        }
    }
    return m;
}

Vector SpectralCube::pixel(std::size_t row, std::size_t col) const {
    Vector v(static_cast<Eigen::Index>(bands_));
    for (std::size_t b = 0; b < bands_; ++b) {
        v(static_cast<Eigen::Index>(b)) = at(b, row, col);
    }
    return v;
}

double SpectralCube::min_value() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double SpectralCube::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------
// Srf

Srf::Srf(Matrix response) : m_(std::move(response)) {
    numkit::require_finite(m_, "srf");
    if (m_.rows() == 0 || m_.cols() == 0) {
        throw ValidationError("srf: empty response matrix");
    }
    if (m_.rows() >= m_.cols()) {
        throw ValidationError("srf: expected fewer channels than bands, got " +
                              std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
    if (m_.minCoeff() < 0.0) {
        throw ValidationError("srf: responses must be nonnegative");
    }
    for (Eigen::Index q = 0; q < m_.rows(); ++q) {
        const double s = m_.row(q).sum();
        if (!(s > 0.0)) {
            throw ValidationError("srf: channel " + std::to_string(q) + " has zero response");
        }
        m_.row(q) /= s;
    }
}

Srf box_average_srf(std::size_t bands, std::size_t channels) {
    if (channels == 0 || channels >= bands) {
        throw ValidationError("box_average_srf: need 0 < channels < bands");
    }
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(bands));
    for (std::size_t q = 0; q < channels; ++q) {
        const std::size_t lo = q * bands / channels;
        const std::size_t hi = (q + 1) * bands / channels;
        for (std::size_t b = lo; b < hi; ++b) {
            m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(b)) = 1.0;
        }
    }
    return Srf(std::move(m));
}

// ---------------------------------------------------------------------------
// Overlap split

OverlapLayout make_layout(std::size_t width, std::size_t height, ColumnRange overlap) {
    if (overlap.size() == 0) {
        throw ValidationError("overlap column range is empty");
    }
    if (overlap.end > width) {
        throw ValidationError("overlap columns [" + std::to_string(overlap.begin) + ", " +
                              std::to_string(overlap.end) + ") exceed image width " +
                              std::to_string(width));
    }
    OverlapLayout layout{width, height, overlap, {}, {}};
    layout.in_pixels.reserve(height * overlap.size());
    layout.out_pixels.reserve(height * (width - overlap.size()));
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const std::size_t p = r * width + c;
            if (c >= overlap.begin && c < overlap.end) {
                layout.in_pixels.push_back(p);
            } else {
                layout.out_pixels.push_back(p);
            }
        }
    }
    return layout;
}

SpectralCube simulate_ms(const SpectralCube& hs, const Srf& srf) {
    if (static_cast<std::size_t>(srf.bands()) != hs.bands()) {
        throw ValidationError("simulate_ms: srf expects " + std::to_string(srf.bands()) +
                              " bands, cube has " + std::to_string(hs.bands()));
    }
    const Matrix ms = srf.matrix() * hs.to_pixels();
    return SpectralCube::from_pixels(ms, hs.width(), hs.height());
}

Matrix gather_pixels(const SpectralCube& cube, const std::vector<std::size_t>& pixels) {
    const std::size_t plane = cube.pixel_count();
    Matrix m(static_cast<Eigen::Index>(cube.bands()), static_cast<Eigen::Index>(pixels.size()));
    const auto& v = cube.values();
    for (std::size_t b = 0; b < cube.bands(); ++b) {
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i)) = v[b * plane + pixels[i]];
        }
    }
    return m;
}

OverlapSplit split_overlap(const SpectralCube& hs, const SpectralCube& ms, ColumnRange overlap) {
    if (hs.width() != ms.width() || hs.height() != ms.height()) {
        throw ValidationError("split_overlap: HS and MS cubes differ in size");
    }
    OverlapSplit s;
    s.layout = make_layout(hs.width(), hs.height(), overlap);
    s.h_in = gather_pixels(hs, s.layout.in_pixels);
    s.m_in = gather_pixels(ms, s.layout.in_pixels);
    s.m_out = gather_pixels(ms, s.layout.out_pixels);
    s.h_out_ref = gather_pixels(hs, s.layout.out_pixels);
    return s;
}

SpectralCube out_region_cube(const Matrix& spectra, const OverlapLayout& layout) {
    if (static_cast<std::size_t>(spectra.cols()) != layout.out_pixels.size()) {
        throw ValidationError("out_region_cube: expected " +
                              std::to_string(layout.out_pixels.size()) + " spectra, got " +
                              std::to_string(spectra.cols()));
    }
    return SpectralCube::from_pixels(spectra, layout.out_width(), layout.height);
}

SpectralCube reassemble(const Matrix& in_spectra, const Matrix& out_spectra,
                        const OverlapLayout& layout) {
    if (static_cast<std::size_t>(in_spectra.cols()) != layout.in_pixels.size() ||
        static_cast<std::size_t>(out_spectra.cols()) != layout.out_pixels.size() ||
        in_spectra.rows() != out_spectra.rows()) {
        throw ValidationError("reassemble: spectra do not match the overlap layout");
    }
    Matrix full(in_spectra.rows(), static_cast<Eigen::Index>(layout.width * layout.height));
    for (std::size_t i = 0; i < layout.in_pixels.size(); ++i) {
        full.col(static_cast<Eigen::Index>(layout.in_pixels[i])) = in_spectra.col(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < layout.out_pixels.size(); ++i) {
        full.col(static_cast<Eigen::Index>(layout.out_pixels[i])) = out_spectra.col(static_cast<Eigen::Index>(i));
    }
    return SpectralCube::from_pixels(full, layout.width, layout.height);
}

// ---------------------------------------------------------------------------
// Cube files

std::filesystem::path sidecar_path(const std::filesystem::path& payload) {
    auto p = payload;
    p.replace_extension(".json");
    if (p == payload) {
        p += ".json";
    }
    return p;
}

SpectralCube load_cube(const std::filesystem::path& path) {
    const CubeHeader h = read_header(path);
    std::vector<double> values = read_f32_le(path, h.width * h.height * h.bands);
    if (!h.matrix) {
        for (double& v : values) {
            v = std::clamp(v / h.data_max, 0.0, 1.0);
        }
    }
    return SpectralCube(h.width, h.height, h.bands, std::move(values));
}

void save_cube(const SpectralCube& cube, const std::filesystem::path& path) {
    if (cube.bands() == 0) {
        throw ValidationError("save_cube: cube has no bands");
    }
    {
        auto out = open_out(path, std::ios::binary);
        write_f32_le(out, cube.values());
        if (!out) {
            throw IoError("write to '" + path.string() + "' failed");
        }
    }
    write_header(path, {cube.width(), cube.height(), cube.bands(), 1.0, false});
}

Matrix load_matrix_cube(const std::filesystem::path& path) {
    const CubeHeader h = read_header(path);
    if (h.height != 1) {
        throw ValidationError("'" + path.string() + "' is not a matrix container (height != 1)");
    }
    std::vector<double> values = read_f32_le(path, h.width * h.bands);
    Matrix m(static_cast<Eigen::Index>(h.bands), static_cast<Eigen::Index>(h.width));
    for (std::size_t r = 0; r < h.bands; ++r) {
        for (std::size_t c = 0; c < h.width; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * h.width + c];
        }
    }
    return m;
}

void save_matrix_cube(const Matrix& m, const std::filesystem::path& path) {
    numkit::require_finite(m, "save_matrix_cube");
    if (m.rows() == 0) {
        throw ValidationError("save_matrix_cube: matrix has no rows");
    }
    std::vector<double> values(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            values[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
        }
    }
    {
        auto out = open_out(path, std::ios::binary);
        write_f32_le(out, values);
        if (!out) {
            throw IoError("write to '" + path.string() + "' failed");
        }
    }
    write_header(path, {static_cast<std::size_t>(m.cols()), 1, static_cast<std::size_t>(m.rows()),
                        1.0, true});
}

// ---------------------------------------------------------------------------
// CSV

Matrix load_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_double(f, v) || !std::isfinite(v)) {
                throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) +
                                      ": not a finite number: '" + f + "'");
            }
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ValidationError("'" + path.string() + "' line " + std::to_string(line_no) +
                                  ": ragged row (" + std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(rows.front().size()) + ")");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError("'" + path.string() + "' contains no data");
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << m(r, c);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

// ---------------------------------------------------------------------------
// Labels

std::size_t LabelField::class_count() const {
    int top = 0;
    for (int l : labels) {
        top = std::max(top, l);
    }
    return static_cast<std::size_t>(top);
}

LabelField load_label_split(const std::filesystem::path& path, std::size_t width,
                            std::size_t height) {
    auto in = open_in(path);
    LabelField f{width, height, std::vector<int>(width * height, 0),
                 std::vector<SampleSplit>(width * height, SampleSplit::none)};
    std::set<int> classes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        const auto where = "'" + path.string() + "' line " + std::to_string(line_no);
        if (fields.size() != 4) {
            throw ValidationError(where + ": expected row,col,class_id,split");
        }
        double row = 0.0;
        double col = 0.0;
        double cls = 0.0;
        if (!parse_double(fields[0], row) || !parse_double(fields[1], col) ||
            !parse_double(fields[2], cls)) {
            if (line_no == 1) {
                continue;  // header
            }
            throw ValidationError(where + ": non-numeric row/col/class_id");
        }
        if (row < 0 || col < 0 || row >= static_cast<double>(height) ||
            col >= static_cast<double>(width) || row != std::floor(row) || col != std::floor(col)) {
            throw ValidationError(where + ": pixel outside the image");
        }
        if (cls < 1 || cls != std::floor(cls)) {
            throw ValidationError(where + ": class_id must be a positive integer");
        }
        SampleSplit tag = SampleSplit::none;
        if (fields[3] == "train") {
            tag = SampleSplit::train;
        } else if (fields[3] == "test") {
            tag = SampleSplit::test;
        } else {
            throw ValidationError(where + ": split must be 'train' or 'test'");
        }
        const auto p = static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col);
        if (f.split[p] != SampleSplit::none) {
            throw ValidationError(where + ": pixel listed twice");
        }
        f.labels[p] = static_cast<int>(cls);
        f.split[p] = tag;
        classes.insert(static_cast<int>(cls));
    }
    if (!classes.empty() && *classes.rbegin() != static_cast<int>(classes.size())) {
        throw ValidationError("'" + path.string() + "': class ids must be contiguous from 1");
    }
    return f;
}

}  // namespace jslol
