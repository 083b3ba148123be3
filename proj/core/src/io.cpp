#include "betamq/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "betamq/errors.hpp"

namespace betamq::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::string& header,
                                                std::size_t fields) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw ParseError("CSV: bad or missing header, expected '" + header + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != fields) {
            throw ParseError("CSV line " + std::to_string(line_no) +
                             ": expected " + std::to_string(fields) + " fields");
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

double to_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ParseError("trailing characters in number");
        return v;
    } catch (const std::exception&) {
        throw ParseError("CSV: bad numeric field '" + s + "'");
    }
}

std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("CSV: bad integer field '" + s + "'");
    }
    return v;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string trace_csv(const std::vector<RankRecord>& records) {
    std::ostringstream out;
    out << "step,queue,label,rank,choice_kind\n";
    for (const auto& rec : records) {
        out << rec.step << ',' << rec.queue << ',' << rec.label << ','
            << rec.rank << ',' << to_string(rec.choice_kind) << '\n';
    }
    return out.str();
}

std::vector<RankRecord> parse_trace_csv(const std::string& text) {
    std::vector<RankRecord> records;
    for (const auto& row :
         parse_csv(text, "step,queue,label,rank,choice_kind", 5)) {
        RankRecord rec;
        rec.step = to_u64(row[0]);
        rec.queue = static_cast<std::size_t>(to_u64(row[1]));
        rec.label = static_cast<std::int64_t>(to_u64(row[2]));
        rec.rank = static_cast<std::int64_t>(to_u64(row[3]));
        if (row[4] == "single") {
            rec.choice_kind = ChoiceKind::kSingle;
        } else if (row[4] == "two-choice") {
            rec.choice_kind = ChoiceKind::kTwoChoice;
        } else {
            throw ParseError("trace CSV: bad choice_kind '" + row[4] + "'");
        }
        records.push_back(rec);
    }
    return records;
}

std::string run_metadata_json(const ProcessConfig& config,
                              const TraceResult& result) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(config.to_json());
    j["M"] = result.insert_count;
    j["T"] = result.removal_count;
    j["valid"] = result.valid;
    j["wallclock_ns"] = result.wallclock_ns;
    return j.dump(2);
}

std::string trajectory_csv(const std::vector<PotentialSnapshot>& series) {
    std::ostringstream out;
    out << "t,mu,phi,psi,gamma,gap\n";
    for (const auto& snap : series) {
        out << snap.t << ',' << fmt_double(snap.mu) << ',' << fmt_double(snap.phi)
            << ',' << fmt_double(snap.psi) << ',' << fmt_double(snap.gamma_pot)
            << ',' << fmt_double(snap.gap) << '\n';
    }
    return out.str();
}

std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text) {
    std::vector<TrajectoryRow> rows;
    for (const auto& row : parse_csv(text, "t,mu,phi,psi,gamma,gap", 6)) {
        rows.push_back(TrajectoryRow{to_u64(row[0]), to_double(row[1]),
                                     to_double(row[2]), to_double(row[3]),
                                     to_double(row[4]), to_double(row[5])});
    }
    return rows;
}

std::string stripe_csv(const std::vector<double>& s_grid,
                       const std::vector<double>& b_gt,
                       const std::vector<double>& b_lt,
                       const std::vector<double>& bound) {
    if (s_grid.size() != b_gt.size() || s_grid.size() != b_lt.size() ||
        s_grid.size() != bound.size()) {
        throw ParameterOutOfRange("stripe_csv: column size mismatch");
    }
    std::ostringstream out;
    out << "s,b_gt,b_lt,bound\n";
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        out << fmt_double(s_grid[k]) << ',' << fmt_double(b_gt[k]) << ','
            << fmt_double(b_lt[k]) << ',' << fmt_double(bound[k]) << '\n';
    }
    return out.str();
}

std::vector<StripeRow> parse_stripe_csv(const std::string& text) {
    std::vector<StripeRow> rows;
    for (const auto& row : parse_csv(text, "s,b_gt,b_lt,bound", 4)) {
        rows.push_back(StripeRow{to_double(row[0]), to_double(row[1]),
                                 to_double(row[2]), to_double(row[3])});
    }
    return rows;
}

std::string experiment_csv(const ScalingTable& table) {
    std::ostringstream out;
    out << "n,beta,metric,mean,stderr,seeds\n";
    for (const auto& row : table.rows) {
        out << row.n << ',' << fmt_double(row.beta) << ',' << row.metric << ','
            << fmt_double(row.mean) << ',' << fmt_double(row.stderr_mean) << ','
            << row.seeds << '\n';
    }
    return out.str();
}

ScalingTable parse_experiment_csv(const std::string& text) {
    ScalingTable table;
    for (const auto& row : parse_csv(text, "n,beta,metric,mean,stderr,seeds", 6)) {
        ExperimentRow r;
        r.n = static_cast<std::size_t>(to_u64(row[0]));
        r.beta = to_double(row[1]);
        r.metric = row[2];
        r.mean = to_double(row[3]);
        r.stderr_mean = to_double(row[4]);
        r.seeds = static_cast<std::size_t>(to_u64(row[5]));
        table.rows.push_back(std::move(r));
    }
    return table;
}

std::string log_csv(const std::vector<LogRecord>& log) {
    std::ostringstream out;
    out << "kind,thread,timestamp_ns,key,queue\n";
    for (const auto& rec : log) {
        out << (rec.kind == EventKind::kInsert ? "insert" : "remove") << ','
            << rec.thread << ',' << rec.timestamp_ns << ',' << rec.key << ','
            << rec.queue << '\n';
    }
    return out.str();
}

std::vector<LogRecord> parse_log_csv(const std::string& text) {
    std::vector<LogRecord> log;
    for (const auto& row : parse_csv(text, "kind,thread,timestamp_ns,key,queue", 5)) {
        LogRecord rec;
        if (row[0] == "insert") {
            rec.kind = EventKind::kInsert;
        } else if (row[0] == "remove") {
            rec.kind = EventKind::kRemove;
        } else {
            throw ParseError("log CSV: bad kind '" + row[0] + "'");
        }
        rec.thread = static_cast<std::uint32_t>(to_u64(row[1]));
        rec.timestamp_ns = to_u64(row[2]);
        rec.key = to_u64(row[3]);
        rec.queue = static_cast<std::uint32_t>(to_u64(row[4]));
        log.push_back(rec);
    }
    return log;
}

}  // namespace betamq::io
