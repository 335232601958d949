#include "cameo/domain.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cameo/errors.hpp"
#include "cameo/util.hpp"

namespace cameo::domain {

namespace {

std::ifstream open_or_throw(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

double field_number(const std::vector<std::string>& f, std::size_t col, const std::string& source,
                    std::size_t line) {
  auto v = parse_number(f.at(col));
  if (!v || !std::isfinite(*v))
    throw ParseError(source, line, col + 1, "expected a number, got '" + f[col] + "'");
  return *v;
}

std::string id_number(double v) {
  // 2 -> "2", 0.5 -> "0.5"; used to build readable config ids.
  return format_number(v);
}

}  // namespace

void WindFarmSite::check() const {
  if (site_id.empty()) throw RangeError("site: empty site_id");
  if (!(lon >= -180 && lon <= 180))
    throw RangeError("site " + site_id + ": longitude " + format_number(lon) + " outside [-180, 180]");
  if (!(lat >= -90 && lat <= 90))
    throw RangeError("site " + site_id + ": latitude " + format_number(lat) + " outside [-90, 90]");
  if (!(capacity_mw > 0)) throw RangeError("site " + site_id + ": capacity must be > 0");
  if (!(interconnect_mw > 0))
    throw RangeError("site " + site_id + ": interconnection limit must be > 0");
}

void HistoricalRecord::check() const {
  const std::size_t n = wind_ms.size();
  if (da_usd_mwh.size() != n || rt_usd_mwh.size() != n || res_usd_mw.size() != n)
    throw InvariantError("history " + site_id + ": series lengths differ");
  if (n % kHoursPerDay != 0)
    throw InvariantError("history " + site_id + ": " + std::to_string(n) +
                         " hours is not a whole number of days");
  for (std::size_t i = 0; i < n; ++i)
    if (!(wind_ms[i] >= 0) || !std::isfinite(wind_ms[i]))
      throw InvariantError("history " + site_id + ": wind speed at hour " + std::to_string(i) +
                           " is negative or non-finite");
}

void BatteryConfig::check() const {
  if (!(duration_h > 0)) throw RangeError("battery " + config_id + ": duration must be > 0");
  if (!(rating_mw > 0)) throw RangeError("battery " + config_id + ": rating must be > 0");
  if (!(cost_usd_per_kw >= 0)) throw RangeError("battery " + config_id + ": cost must be >= 0");
  if (!(rte > 0 && rte <= 1))
    throw RangeError("battery " + config_id + ": round-trip efficiency " + format_number(rte) +
                     " outside (0, 1]");
}

void PowerCurve::check() const {
  if (!(0 < cut_in_ms && cut_in_ms < rated_ms && rated_ms < cut_out_ms))
    throw RangeError("power curve requires 0 < cut-in < rated < cut-out");
}

// ---- sites ----------------------------------------------------------------

std::vector<WindFarmSite> parse_sites(std::istream& in, const std::string& source) {
  static const std::vector<std::string> kHeader = {"site_id",  "name",        "lon",
                                                   "lat",      "capacity_mw", "interconnect_mw"};
  std::vector<WindFarmSite> sites;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto f = split_csv_record(line);
    if (!header_seen) {
      for (auto& s : f) s = std::string(trim(s));
      if (f != kHeader) throw ParseError(source, lineno, 1, "unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    if (f.size() != kHeader.size())
      throw ParseError(source, lineno, std::min(f.size(), kHeader.size()) + 1,
                       "expected 6 fields, got " + std::to_string(f.size()));
    WindFarmSite s;
    s.site_id = std::string(trim(f[0]));
    s.name = std::string(trim(f[1]));
    s.lon = field_number(f, 2, source, lineno);
    s.lat = field_number(f, 3, source, lineno);
    s.capacity_mw = field_number(f, 4, source, lineno);
    s.interconnect_mw = field_number(f, 5, source, lineno);
    try {
      s.check();
    } catch (const RangeError& e) {
      throw RangeError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    sites.push_back(std::move(s));
  }
  if (!header_seen) throw ParseError(source, lineno, 0, "missing header row");
  return sites;
}

std::vector<WindFarmSite> load_sites(const fs::path& file) {
  auto in = open_or_throw(file);
  return parse_sites(in, file.string());
}

std::string write_sites_csv(const std::vector<WindFarmSite>& sites) {
  std::string out = "site_id,name,lon,lat,capacity_mw,interconnect_mw\n";
  for (const auto& s : sites) {
    out += csv_field(s.site_id) + "," + csv_field(s.name) + "," + format_number(s.lon) + "," +
           format_number(s.lat) + "," + format_number(s.capacity_mw) + "," +
           format_number(s.interconnect_mw) + "\n";
  }
  return out;
}

// ---- history --------------------------------------------------------------

HistoricalRecord parse_history(std::istream& in, const std::string& source,
                               const std::string& site_id) {
  std::map<std::string, double> constants;
  std::map<std::string, std::size_t> col;
  HistoricalRecord rec;
  rec.site_id = site_id;
  std::optional<std::int64_t> prev;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      // `# const <column>=<value>` declares a constant-column fallback.
      auto body = trim(t.substr(1));
      if (body.rfind("const ", 0) == 0) {
        auto kv = body.substr(6);
        auto eq = kv.find('=');
        auto v = eq == std::string_view::npos ? std::nullopt : parse_number(kv.substr(eq + 1));
        if (!v) throw ParseError(source, lineno, 1, "malformed constant declaration");
        constants[std::string(trim(kv.substr(0, eq)))] = *v;
      }
      continue;
    }
    auto f = split_csv_record(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < f.size(); ++i) col[std::string(trim(f[i]))] = i;
      for (const char* req : {"site_id", "timestamp_utc", "wind_ms", "da_usd_mwh", "rt_usd_mwh"})
        if (!col.count(req))
          throw ParseError(source, lineno, 0, std::string("missing column '") + req + "'");
      if (!col.count("res_usd_mw") && !constants.count("res_usd_mw"))
        throw ParseError(source, lineno, 0,
                         "missing column 'res_usd_mw' and no '# const res_usd_mw=' fallback");
      header_seen = true;
      continue;
    }
    if (f.size() != col.size())
      throw ParseError(source, lineno, std::min(f.size(), col.size()) + 1,
                       "expected " + std::to_string(col.size()) + " fields");
    if (trim(f[col["site_id"]]) != site_id) continue;
    auto ts = parse_iso_utc(f[col["timestamp_utc"]]);
    if (!ts)
      throw ParseError(source, lineno, col["timestamp_utc"] + 1,
                       "bad timestamp '" + f[col["timestamp_utc"]] + "'");
    if (prev) {
      if (*ts <= *prev)
        throw ParseError(source, lineno, col["timestamp_utc"] + 1,
                         "timestamps not strictly increasing");
      if (*ts != *prev + 3600) {
        auto missing = format_iso_utc(*prev + 3600);
        throw GapError(missing, source + ":" + std::to_string(lineno) + ": missing hour " +
                                    missing + " for site " + site_id);
      }
    } else {
      rec.start_utc = *ts;
    }
    prev = ts;
    double wind = field_number(f, col["wind_ms"], source, lineno);
    if (wind < 0)
      throw RangeError(source + ":" + std::to_string(lineno) + ": negative wind speed");
    rec.wind_ms.push_back(wind);
    rec.da_usd_mwh.push_back(field_number(f, col["da_usd_mwh"], source, lineno));
    rec.rt_usd_mwh.push_back(field_number(f, col["rt_usd_mwh"], source, lineno));
    rec.res_usd_mw.push_back(col.count("res_usd_mw")
                                 ? field_number(f, col["res_usd_mw"], source, lineno)
                                 : constants["res_usd_mw"]);
  }
  if (!header_seen) throw ParseError(source, lineno, 0, "missing header row");
  if (rec.wind_ms.empty())
    throw InsufficientData(source + ": no rows for site '" + site_id + "'");
  rec.check();
  return rec;
}

HistoricalRecord load_history(const fs::path& file, const std::string& site_id) {
  auto in = open_or_throw(file);
  return parse_history(in, file.string(), site_id);
}

std::string write_history_csv(const std::vector<HistoricalRecord>& records) {
  std::string out = "site_id,timestamp_utc,wind_ms,da_usd_mwh,rt_usd_mwh,res_usd_mw\n";
  for (const auto& r : records) {
    for (std::size_t h = 0; h < r.hours(); ++h) {
      out += csv_field(r.site_id);
      out += ',';
      out += format_iso_utc(r.timestamp(h));
      for (double v : {r.wind_ms[h], r.da_usd_mwh[h], r.rt_usd_mwh[h], r.res_usd_mw[h]}) {
        out += ',';
        out += format_number(v);
      }
      out += '\n';
    }
  }
  return out;
}

// ---- battery catalog ------------------------------------------------------

namespace {

// A catalog attribute may be a scalar, a per-chemistry map, or a per-chemistry map of
// per-duration values.
double catalog_value(const json& spec, const std::string& key, const std::string& chemistry,
                     double duration) {
  if (!spec.contains(key)) throw ParseError("battery catalog", 0, 0, "missing key '" + key + "'");
  const json& v = spec.at(key);
  if (v.is_number()) return v.get<double>();
  if (!v.is_object() || !v.contains(chemistry))
    throw ParseError("battery catalog", 0, 0, "'" + key + "' has no entry for '" + chemistry + "'");
  const json& c = v.at(chemistry);
  if (c.is_number()) return c.get<double>();
  auto d = c.find(id_number(duration));
  if (d == c.end() || !d->is_number())
    throw ParseError("battery catalog", 0, 0,
                     "'" + key + "." + chemistry + "' has no value for duration " + id_number(duration));
  return d->get<double>();
}

}  // namespace

std::vector<BatteryConfig> parse_battery_catalog(const json& doc) {
  std::vector<BatteryConfig> out;
  if (!doc.is_object()) throw ParseError("battery catalog", 0, 0, "expected an object");
  if (doc.contains("batteries")) {
    for (const auto& e : doc.at("batteries")) {
      BatteryConfig b;
      try {
        b = e.get<BatteryConfig>();
      } catch (const json::exception& ex) {
        throw ParseError("battery catalog", 0, 0, ex.what());
      }
      b.check();
      out.push_back(std::move(b));
    }
    return out;
  }
  for (const char* k : {"chemistries", "durations_h", "ratings_mw"})
    if (!doc.contains(k) || !doc.at(k).is_array())
      throw ParseError("battery catalog", 0, 0, std::string("missing list '") + k + "'");
  for (const auto& chem : doc.at("chemistries")) {
    auto label = chem.get<std::string>();
    for (const auto& dur : doc.at("durations_h")) {
      for (const auto& rating : doc.at("ratings_mw")) {
        BatteryConfig b;
        b.chemistry = label;
        b.duration_h = dur.get<double>();
        b.rating_mw = rating.get<double>();
        b.config_id = label + "-" + id_number(b.duration_h) + "h-" + id_number(b.rating_mw) + "mw";
        b.cost_usd_per_kw = catalog_value(doc, "cost_usd_per_kw", label, b.duration_h);
        b.rte = catalog_value(doc, "rte", label, b.duration_h);
        b.check();
        out.push_back(std::move(b));
      }
    }
  }
  return out;
}

std::vector<BatteryConfig> load_battery_catalog(const fs::path& file) {
  json doc;
  try {
    doc = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw ParseError(file.string(), 0, 0, e.what());
  }
  return parse_battery_catalog(doc);
}

json serialize_battery_catalog(const std::vector<BatteryConfig>& configs) {
  return json{{"batteries", configs}};
}

// ---- conversions ----------------------------------------------------------

double wind_to_power(double v, const PowerCurve& c) {
  if (v < c.cut_in_ms || v >= c.cut_out_ms) return 0.0;
  if (v >= c.rated_ms) return 1.0;
  const double lo = c.cut_in_ms * c.cut_in_ms * c.cut_in_ms;
  const double hi = c.rated_ms * c.rated_ms * c.rated_ms;
  return (v * v * v - lo) / (hi - lo);
}

std::vector<DayProfile> slice_days(const HistoricalRecord& r, const PowerCurve& curve) {
  r.check();
  std::vector<DayProfile> days;
  days.reserve(r.days());
  for (std::size_t d = 0; d < r.days(); ++d) {
    DayProfile p;
    p.start_utc = r.timestamp(d * kHoursPerDay);
    p.date = format_date_utc(p.start_utc);
    auto first = static_cast<std::ptrdiff_t>(d * kHoursPerDay);
    auto last = first + static_cast<std::ptrdiff_t>(kHoursPerDay);
    p.wind_ms.assign(r.wind_ms.begin() + first, r.wind_ms.begin() + last);
    p.da.assign(r.da_usd_mwh.begin() + first, r.da_usd_mwh.begin() + last);
    p.rt.assign(r.rt_usd_mwh.begin() + first, r.rt_usd_mwh.begin() + last);
    p.res.assign(r.res_usd_mw.begin() + first, r.res_usd_mw.begin() + last);
    p.wind_factor.reserve(kHoursPerDay);
    for (double v : p.wind_ms) p.wind_factor.push_back(wind_to_power(v, curve));
    days.push_back(std::move(p));
  }
  return days;
}

HistoricalRecord reassemble(const std::string& site_id, const std::vector<DayProfile>& days) {
  HistoricalRecord r;
  r.site_id = site_id;
  if (days.empty()) return r;
  r.start_utc = days.front().start_utc;
  for (std::size_t d = 0; d < days.size(); ++d) {
    if (days[d].start_utc != r.start_utc + static_cast<std::int64_t>(d * kHoursPerDay * 3600))
      throw InvariantError("reassemble: days are not contiguous");
    const auto& p = days[d];
    r.wind_ms.insert(r.wind_ms.end(), p.wind_ms.begin(), p.wind_ms.end());
    r.da_usd_mwh.insert(r.da_usd_mwh.end(), p.da.begin(), p.da.end());
    r.rt_usd_mwh.insert(r.rt_usd_mwh.end(), p.rt.begin(), p.rt.end());
    r.res_usd_mw.insert(r.res_usd_mw.end(), p.res.begin(), p.res.end());
  }
  r.check();
  return r;
}

// ---- json -----------------------------------------------------------------

void to_json(json& j, const WindFarmSite& s) {
  j = json{{"site_id", s.site_id},         {"name", s.name},
           {"lon", s.lon},                 {"lat", s.lat},
           {"capacity_mw", s.capacity_mw}, {"interconnect_mw", s.interconnect_mw}};
}

void from_json(const json& j, WindFarmSite& s) {
  j.at("site_id").get_to(s.site_id);
  s.name = j.value("name", std::string{});
  j.at("lon").get_to(s.lon);
  j.at("lat").get_to(s.lat);
  j.at("capacity_mw").get_to(s.capacity_mw);
  j.at("interconnect_mw").get_to(s.interconnect_mw);
}

void to_json(json& j, const HistoricalRecord& r) {
  j = json{{"site_id", r.site_id},       {"start_utc", format_iso_utc(r.start_utc)},
           {"wind_ms", r.wind_ms},       {"da_usd_mwh", r.da_usd_mwh},
           {"rt_usd_mwh", r.rt_usd_mwh}, {"res_usd_mw", r.res_usd_mw}};
}

void from_json(const json& j, HistoricalRecord& r) {
  j.at("site_id").get_to(r.site_id);
  auto ts = parse_iso_utc(j.at("start_utc").get<std::string>());
  if (!ts) throw ParseError("history payload", 0, 0, "bad start_utc");
  r.start_utc = *ts;
  j.at("wind_ms").get_to(r.wind_ms);
  j.at("da_usd_mwh").get_to(r.da_usd_mwh);
  j.at("rt_usd_mwh").get_to(r.rt_usd_mwh);
  j.at("res_usd_mw").get_to(r.res_usd_mw);
}

void to_json(json& j, const BatteryConfig& b) {
  j = json{{"config_id", b.config_id},       {"chemistry", b.chemistry},
           {"duration_h", b.duration_h},     {"rating_mw", b.rating_mw},
           {"cost_usd_per_kw", b.cost_usd_per_kw}, {"rte", b.rte}};
}

void from_json(const json& j, BatteryConfig& b) {
  j.at("chemistry").get_to(b.chemistry);
  j.at("duration_h").get_to(b.duration_h);
  j.at("rating_mw").get_to(b.rating_mw);
  j.at("cost_usd_per_kw").get_to(b.cost_usd_per_kw);
  j.at("rte").get_to(b.rte);
  b.config_id = j.value("config_id", b.chemistry + "-" + id_number(b.duration_h) + "h-" +
                                         id_number(b.rating_mw) + "mw");
}

void to_json(json& j, const PowerCurve& c) {
  j = json{{"cut_in_ms", c.cut_in_ms}, {"rated_ms", c.rated_ms}, {"cut_out_ms", c.cut_out_ms}};
}

void from_json(const json& j, PowerCurve& c) {
  c.cut_in_ms = j.value("cut_in_ms", 3.0);
  c.rated_ms = j.value("rated_ms", 12.0);
  c.cut_out_ms = j.value("cut_out_ms", 25.0);
}

void to_json(json& j, const DayProfile& d) {
  j = json{{"date", d.date},       {"start_utc", format_iso_utc(d.start_utc)},
           {"wind_ms", d.wind_ms}, {"wind_factor", d.wind_factor},
           {"da", d.da},           {"rt", d.rt},
           {"res", d.res}};
}

void from_json(const json& j, DayProfile& d) {
  j.at("date").get_to(d.date);
  auto ts = parse_iso_utc(j.at("start_utc").get<std::string>());
  if (!ts) throw ParseError("day payload", 0, 0, "bad start_utc");
  d.start_utc = *ts;
  j.at("wind_ms").get_to(d.wind_ms);
  j.at("wind_factor").get_to(d.wind_factor);
  j.at("da").get_to(d.da);
  j.at("rt").get_to(d.rt);
  j.at("res").get_to(d.res);
}

}  // namespace cameo::domain
