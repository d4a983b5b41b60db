#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftlab/errors.hpp"
#include "driftlab/schema.hpp"

namespace driftlab {

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
        return s.substr(1, s.size() - 2);
    return s;
}

// comma split honoring single/double quotes; fields are trimmed
inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    char quote = 0;
    for (char c : line) {
        if (quote != 0) {
            field += c;
            if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            field += c;
            quote = c;
        } else if (c == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim(field));
    return out;
}

inline std::optional<double> parse_double(const std::string& token) {
    if (token.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) return std::nullopt;
    return v;
}

}  // namespace detail

enum class AttrKind { Numeric, Nominal };

struct AttributeDecl {
    std::string name;
    AttrKind kind = AttrKind::Numeric;
    std::vector<std::string> labels;  // nominal values in declaration order

    int label_index(const std::string& token) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == token) return static_cast<int>(i);
        return -1;
    }
};

// Streaming ARFF reader: the header is parsed at construction, data rows are
// pulled one at a time, so memory stays constant in the stream length.
// Nominal values map to indices by declaration order; rows come back as
// doubles (nominal fields hold the index).
class ArffReader {
  public:
    ArffReader(std::istream& in, std::string source = "<arff>")
        : in_(in), source_(std::move(source)) {
        parse_header();
    }

    const std::string& relation() const { return relation_; }
    const std::vector<AttributeDecl>& attributes() const { return attributes_; }
    long line_number() const { return line_; }

    bool next_row(std::vector<double>& out) {
        std::string line;
        while (read_line(line)) {
            if (line.empty() || line[0] == '%') continue;
            if (line[0] == '{')
                throw ParseError(source_, line_, "sparse ARFF rows are not supported");
            const std::vector<std::string> fields = detail::split_fields(line);
            if (fields.size() != attributes_.size())
                throw ParseError(source_, line_,
                                 "expected " + std::to_string(attributes_.size()) +
                                     " fields, found " + std::to_string(fields.size()));
            out.resize(fields.size());
            for (std::size_t i = 0; i < fields.size(); ++i)
                out[i] = convert(fields[i], attributes_[i]);
            return true;
        }
        return false;
    }

  private:
    bool read_line(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            line = detail::trim(line);
            return true;
        }
        return false;
    }

    void parse_header() {
        std::string line;
        while (read_line(line)) {
            if (line.empty() || line[0] == '%') continue;
            const std::string lower = detail::to_lower(line);
            if (lower.rfind("@relation", 0) == 0) {
                relation_ = detail::unquote(detail::trim(line.substr(9)));
            } else if (lower.rfind("@attribute", 0) == 0) {
                parse_attribute(detail::trim(line.substr(10)));
            } else if (lower.rfind("@data", 0) == 0) {
                if (attributes_.empty())
                    throw ParseError(source_, line_, "@data before any @attribute");
                return;
            } else {
                throw ParseError(source_, line_, "unrecognized header line: " + line);
            }
        }
        throw ParseError(source_, line_, "missing @data section");
    }

    void parse_attribute(const std::string& rest) {
        std::string name;
        std::size_t pos = 0;
        if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
            const char quote = rest[0];
            const std::size_t end = rest.find(quote, 1);
            if (end == std::string::npos)
                throw ParseError(source_, line_, "unterminated attribute name");
            name = rest.substr(1, end - 1);
            pos = end + 1;
        } else {
            const std::size_t end = rest.find_first_of(" \t");
            if (end == std::string::npos)
                throw ParseError(source_, line_, "attribute is missing a type");
            name = rest.substr(0, end);
            pos = end;
        }
        const std::string type = detail::trim(rest.substr(pos));
        AttributeDecl decl;
        decl.name = name;
        if (!type.empty() && type[0] == '{') {
            if (type.back() != '}')
                throw ParseError(source_, line_, "unterminated nominal value list");
            decl.kind = AttrKind::Nominal;
            for (const std::string& label :
                 detail::split_fields(type.substr(1, type.size() - 2)))
                decl.labels.push_back(detail::unquote(label));
            if (decl.labels.size() < 2)
                throw ParseError(source_, line_, "nominal attribute needs >= 2 values");
            if (decl.labels.size() > static_cast<std::size_t>(Schema::kMaxArity))
                throw ParseError(source_, line_, "nominal arity overflow");
        } else {
            const std::string lower = detail::to_lower(type);
            if (lower == "numeric" || lower == "real" || lower == "integer")
                decl.kind = AttrKind::Numeric;
            else
                throw ParseError(source_, line_, "unsupported attribute type: " + type);
        }
        attributes_.push_back(std::move(decl));
    }

    double convert(const std::string& raw, const AttributeDecl& decl) {
        const std::string token = detail::unquote(raw);
        if (token == "?")
            throw ParseError(source_, line_, "missing value ('?') is not supported");
        if (decl.kind == AttrKind::Numeric) {
            const auto v = detail::parse_double(token);
            if (!v || !std::isfinite(*v))
                throw ParseError(source_, line_, "bad numeric value: " + raw);
            return *v;
        }
        const int index = decl.label_index(token);
        if (index < 0)
            throw ParseError(source_, line_,
                             "value '" + token + "' not in nominal domain of " + decl.name);
        return index;
    }

    std::istream& in_;
    std::string source_;
    std::string relation_;
    std::vector<AttributeDecl> attributes_;
    long line_ = 0;
};

// Headered CSV reader; rows come back as raw string fields.
class CsvReader {
  public:
    CsvReader(std::istream& in, std::string source = "<csv>")
        : in_(in), source_(std::move(source)) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(source_, 1, "empty file");
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        header_ = detail::split_fields(line);
        if (header_.size() < 2) throw ParseError(source_, 1, "header needs >= 2 columns");
    }

    const std::vector<std::string>& header() const { return header_; }
    long line_number() const { return line_; }

    bool next_row(std::vector<std::string>& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (detail::trim(line).empty()) continue;
            out = detail::split_fields(line);
            if (out.size() != header_.size())
                throw ParseError(source_, line_,
                                 "expected " + std::to_string(header_.size()) +
                                     " fields, found " + std::to_string(out.size()));
            return true;
        }
        return false;
    }

  private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> header_;
    long line_ = 0;
};

// Incremental equal-frequency binning over a sliding sample of recent values.
// Cut points are the lower-nearest-rank 20/40/60/80-percentiles of the sample
// (for 5 bins); a value lands in the number of cuts strictly below it, so the
// upper boundary of each interval is inclusive. Skewed samples can collapse
// neighboring cuts, which simply leaves some bins empty.
class Discretizer {
  public:
    explicit Discretizer(int capacity = 1000, int bins = 5)
        : capacity_(capacity), bins_(bins) {
        if (capacity < 1) throw ConfigError("discretizer capacity must be >= 1");
        if (bins < 2) throw ConfigError("discretizer needs >= 2 bins");
    }

    int bins() const { return bins_; }
    const std::vector<double>& cut_points() const { return cuts_; }
    std::size_t sample_size() const { return window_.size(); }

    // appends the value to the bounded sample, recomputes cut points, and
    // returns the value's bin under the updated cut points
    int add(double value) {
        if (!std::isfinite(value)) throw DataError("non-finite value in numeric attribute");
        if (window_.size() == static_cast<std::size_t>(capacity_)) {
            const double oldest = window_.front();
            window_.pop_front();
            sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), oldest));
        }
        window_.push_back(value);
        sorted_.insert(std::lower_bound(sorted_.begin(), sorted_.end(), value), value);
        recompute_cuts();
        return bin_of(value);
    }

    int bin_of(double value) const {
        if (!std::isfinite(value)) throw DataError("non-finite value in numeric attribute");
        return static_cast<int>(std::lower_bound(cuts_.begin(), cuts_.end(), value) -
                                cuts_.begin());
    }

  private:
    void recompute_cuts() {
        const std::int64_t n = static_cast<std::int64_t>(sorted_.size());
        cuts_.resize(static_cast<std::size_t>(bins_ - 1));
        for (int q = 1; q < bins_; ++q) {
            const std::int64_t rank = (q * n + bins_ - 1) / bins_;  // ceil, 1-based
            cuts_[static_cast<std::size_t>(q - 1)] =
                sorted_[static_cast<std::size_t>(rank - 1)];
        }
    }

    int capacity_;
    int bins_;
    std::deque<double> window_;
    std::vector<double> sorted_;
    std::vector<double> cuts_;
};

// Pull-based source of schema-conforming instances.
class InstanceSource {
  public:
    virtual ~InstanceSource() = default;
    virtual const Schema& schema() const = 0;
    virtual bool next(Instance& out) = 0;
};

struct IngestOptions {
    int class_column = -1;  // -1: last attribute
    int discretizer_capacity = 1000;
    int discretizer_bins = 5;
};

// ARFF file to instances: nominal attributes pass through as indices, numeric
// attributes run through per-attribute incremental discretizers.
class ArffInstanceSource : public InstanceSource {
  public:
    ArffInstanceSource(std::istream& in, std::string source, IngestOptions options = {})
        : reader_(in, std::move(source)), options_(options) {
        const auto& decls = reader_.attributes();
        const int n = static_cast<int>(decls.size());
        class_column_ = options_.class_column < 0 ? n - 1 : options_.class_column;
        if (class_column_ < 0 || class_column_ >= n)
            throw ConfigError("class column out of range");
        if (decls[static_cast<std::size_t>(class_column_)].kind != AttrKind::Nominal)
            throw ConfigError("class attribute must be nominal");
        std::vector<int> arities;
        for (int i = 0; i < n; ++i) {
            if (i == class_column_) continue;
            columns_.push_back(i);
            if (decls[static_cast<std::size_t>(i)].kind == AttrKind::Nominal) {
                arities.push_back(
                    static_cast<int>(decls[static_cast<std::size_t>(i)].labels.size()));
                discretizers_.emplace_back();
            } else {
                arities.push_back(options_.discretizer_bins);
                discretizers_.emplace_back(
                    Discretizer(options_.discretizer_capacity, options_.discretizer_bins));
            }
        }
        schema_.emplace(std::move(arities),
                        static_cast<int>(
                            decls[static_cast<std::size_t>(class_column_)].labels.size()));
    }

    const Schema& schema() const override { return *schema_; }
    std::int64_t instances_read() const { return count_; }

    bool next(Instance& out) override {
        if (!reader_.next_row(row_)) return false;
        out.values.resize(columns_.size());
        for (std::size_t a = 0; a < columns_.size(); ++a) {
            const double raw = row_[static_cast<std::size_t>(columns_[a])];
            out.values[a] = discretizers_[a]
                                ? static_cast<std::uint16_t>(discretizers_[a]->add(raw))
                                : static_cast<std::uint16_t>(raw);
        }
        out.class_label = static_cast<int>(row_[static_cast<std::size_t>(class_column_)]);
        out.step = count_++;
        return true;
    }

  private:
    ArffReader reader_;
    IngestOptions options_;
    int class_column_ = -1;
    std::vector<int> columns_;  // file column per schema attribute
    std::vector<std::optional<Discretizer>> discretizers_;
    std::optional<Schema> schema_;
    std::vector<double> row_;
    std::int64_t count_ = 0;
};

// Column treatment for headered CSV input. Auto means numeric (discretized).
// Nominal columns must hold integer codes in [0, arity).
struct CsvColumnSpec {
    enum class Kind { Auto, Numeric, Nominal, Skip } kind = Kind::Auto;
    int arity = 0;  // Nominal only
};

struct CsvHints {
    std::vector<CsvColumnSpec> columns;  // empty: all Auto
    int class_column = -1;               // -1: last non-skipped column
    int num_classes = 0;                 // required; class tokens are integer codes
    IngestOptions options;
};

class CsvInstanceSource : public InstanceSource {
  public:
    CsvInstanceSource(std::istream& in, std::string source, CsvHints hints)
        : reader_(in, std::move(source)), hints_(std::move(hints)) {
        const int n = static_cast<int>(reader_.header().size());
        if (!hints_.columns.empty() &&
            hints_.columns.size() != static_cast<std::size_t>(n))
            throw ConfigError("csv column hints do not match header width");
        if (hints_.columns.empty())
            hints_.columns.resize(static_cast<std::size_t>(n));
        class_column_ = hints_.class_column;
        if (class_column_ < 0) {
            for (int i = n - 1; i >= 0; --i)
                if (hints_.columns[static_cast<std::size_t>(i)].kind !=
                    CsvColumnSpec::Kind::Skip) {
                    class_column_ = i;
                    break;
                }
        }
        if (class_column_ < 0 || class_column_ >= n)
            throw ConfigError("class column out of range");
        if (hints_.num_classes < 2)
            throw ConfigError("csv input needs num_classes >= 2");
        std::vector<int> arities;
        for (int i = 0; i < n; ++i) {
            if (i == class_column_) continue;
            const CsvColumnSpec& spec = hints_.columns[static_cast<std::size_t>(i)];
            if (spec.kind == CsvColumnSpec::Kind::Skip) continue;
            columns_.push_back(i);
            if (spec.kind == CsvColumnSpec::Kind::Nominal) {
                if (spec.arity < 2) throw ConfigError("nominal csv column needs arity >= 2");
                arities.push_back(spec.arity);
                discretizers_.emplace_back();
            } else {
                arities.push_back(hints_.options.discretizer_bins);
                discretizers_.emplace_back(Discretizer(hints_.options.discretizer_capacity,
                                                       hints_.options.discretizer_bins));
            }
        }
        schema_.emplace(std::move(arities), hints_.num_classes);
    }

    const Schema& schema() const override { return *schema_; }
    std::int64_t instances_read() const { return count_; }

    bool next(Instance& out) override {
        if (!reader_.next_row(row_)) return false;
        out.values.resize(columns_.size());
        for (std::size_t a = 0; a < columns_.size(); ++a) {
            const std::string& token = row_[static_cast<std::size_t>(columns_[a])];
            const auto value = detail::parse_double(token);
            if (!value)
                throw ParseError("<csv>", reader_.line_number(),
                                 "bad numeric value: " + token);
            if (discretizers_[a]) {
                out.values[a] = static_cast<std::uint16_t>(discretizers_[a]->add(*value));
            } else {
                const auto code = static_cast<std::int64_t>(*value);
                if (static_cast<double>(code) != *value || code < 0 ||
                    code >= schema_->arity(static_cast<int>(a)))
                    throw ParseError("<csv>", reader_.line_number(),
                                     "nominal code out of range: " + token);
                out.values[a] = static_cast<std::uint16_t>(code);
            }
        }
        const std::string& cls = row_[static_cast<std::size_t>(class_column_)];
        const auto value = detail::parse_double(cls);
        const auto code = value ? static_cast<std::int64_t>(*value) : -1;
        if (!value || static_cast<double>(code) != *value || code < 0 ||
            code >= hints_.num_classes)
            throw ParseError("<csv>", reader_.line_number(), "bad class code: " + cls);
        out.class_label = static_cast<int>(code);
        out.step = count_++;
        return true;
    }

  private:
    CsvReader reader_;
    CsvHints hints_;
    int class_column_ = -1;
    std::vector<int> columns_;
    std::vector<std::optional<Discretizer>> discretizers_;
    std::optional<Schema> schema_;
    std::vector<std::string> row_;
    std::int64_t count_ = 0;
};

// Published sizes of the four benchmark streams, used as a sanity check on
// user-supplied copies (public mirrors occasionally differ).
struct DatasetMeta {
    std::string_view name;
    std::int64_t num_instances;
    int num_attributes;
    int num_classes;
};

inline std::span<const DatasetMeta> benchmark_metadata() {
    static const DatasetMeta table[] = {
        {"PowerSupply", 29928, 2, 2},
        {"Airlines", 539383, 7, 2},
        {"ElectricNorm", 45312, 8, 2},
        {"Sensor", 2219803, 5, 58},
    };
    return table;
}

inline const DatasetMeta* find_benchmark_meta(std::string_view name) {
    const std::string lower = detail::to_lower(name);
    for (const DatasetMeta& meta : benchmark_metadata())
        if (detail::to_lower(meta.name) == lower) return &meta;
    return nullptr;
}

// matches dataset file stems like elecNormNew.arff or powersupply.csv
inline std::string infer_dataset_name(std::string_view filename) {
    const std::string lower = detail::to_lower(filename);
    if (lower.find("power") != std::string::npos) return "PowerSupply";
    if (lower.find("airline") != std::string::npos) return "Airlines";
    if (lower.find("elec") != std::string::npos) return "ElectricNorm";
    if (lower.find("sensor") != std::string::npos) return "Sensor";
    return "";
}

inline void validate_meta(const DatasetMeta& expected, std::int64_t instances, int attrs,
                          int classes) {
    if (instances != expected.num_instances || attrs != expected.num_attributes ||
        classes != expected.num_classes)
        throw DataError(std::string(expected.name) + ": file has " +
                        std::to_string(instances) + " instances / " +
                        std::to_string(attrs) + " attributes / " + std::to_string(classes) +
                        " classes, expected " + std::to_string(expected.num_instances) +
                        "/" + std::to_string(expected.num_attributes) + "/" +
                        std::to_string(expected.num_classes) +
                        " (pass --no-validate to accept this copy)");
}

}  // namespace driftlab
