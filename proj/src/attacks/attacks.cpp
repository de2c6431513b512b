#include "eosscan/attacks/attacks.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

#include "eosscan/error.hpp"

namespace eosscan::attacks {

using json = nlohmann::json;

namespace {

constexpr std::string_view token_account = "eosio.token";

bool is_eos(const TransferPayload& p)
{
    return p.symbol == "EOS";
}

bool is_true_eos(const ActionRecord& a)
{
    return a.transfer_payload && is_eos(*a.transfer_payload) && a.transfer_payload->issuer == token_account &&
           a.code_account == token_account;
}

void add_unique(std::vector<std::string>& v, const std::string& s)
{
    if (std::find(v.begin(), v.end(), s) == v.end())
        v.push_back(s);
}

bool escalates(double received, double spent, double ratio)
{
    if (received <= 0)
        return false;
    return spent <= 0 || received / spent >= ratio;
}

std::string need_string(const json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_string())
        throw MalformedLog(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

double parse_quantity(const json& v)
{
    double q = 0;
    if (v.is_number())
        q = v.get<double>();
    else if (v.is_string())
    {
        const auto s = v.get<std::string>();
        size_t used = 0;
        try
        {
            q = std::stod(s, &used);
        }
        catch (const std::exception&)
        {
            throw MalformedLog("quantity '" + s + "' is not a number");
        }
        if (used != s.size())
            throw MalformedLog("quantity '" + s + "' is not a number");
    }
    else
        throw MalformedLog("quantity must be a number or a decimal string");
    if (!(q >= 0))
        throw MalformedLog("negative quantity");
    return q;
}

ActionRecord parse_action(const json& j)
{
    if (!j.is_object())
        throw MalformedLog("action must be an object");
    ActionRecord a;
    a.code_account = need_string(j, "code_account");
    a.action_name = need_string(j, "action_name");
    a.receiver = j.contains("receiver") ? need_string(j, "receiver") : a.code_account;
    if (j.contains("authorizers"))
    {
        if (!j["authorizers"].is_array())
            throw MalformedLog("authorizers must be an array");
        for (const auto& x : j["authorizers"])
        {
            if (!x.is_string())
                throw MalformedLog("authorizers must be account names");
            a.authorizers.push_back(x.get<std::string>());
        }
    }
    const bool has_payload = j.contains("transfer_payload") && !j["transfer_payload"].is_null();
    if (has_payload != (a.action_name == "transfer"))
        throw MalformedLog("transfer_payload must be present exactly on transfer actions");
    if (has_payload)
    {
        const auto& p = j["transfer_payload"];
        TransferPayload t;
        t.from = need_string(p, "from");
        t.to = need_string(p, "to");
        t.quantity = parse_quantity(p.at("quantity"));
        t.symbol = need_string(p, "symbol");
        t.issuer = need_string(p, "issuer");
        a.transfer_payload = std::move(t);
    }
    return a;
}

}  // namespace

std::string_view to_string(AttackKind k) noexcept
{
    switch (k)
    {
    case AttackKind::fake_eos: return "fake_eos";
    case AttackKind::fake_receipt: return "fake_receipt";
    case AttackKind::rollback: return "rollback";
    case AttackKind::missing_permission_misuse: return "missing_permission_misuse";
    }
    return "?";
}

std::string_view to_string(Confidence c) noexcept
{
    return c == Confidence::suspicious ? "suspicious" : "potential";
}

TransactionRecord parse_transaction(const std::string& line)
{
    json j;
    try
    {
        j = json::parse(line);
    }
    catch (const json::exception& e)
    {
        throw MalformedLog(std::string("not JSON: ") + e.what());
    }
    try
    {
        if (!j.is_object())
            throw MalformedLog("transaction must be an object");
        TransactionRecord tx;
        tx.tx_id = need_string(j, "tx_id");
        const auto& t = j.at("block_time");
        if (!t.is_number_integer())
            throw MalformedLog("block_time must be integer seconds");
        tx.block_time = t.get<int64_t>();
        const auto& acts = j.at("actions");
        if (!acts.is_array() || acts.empty())
            throw MalformedLog("actions must be a non-empty array");
        for (const auto& a : acts)
            tx.actions.push_back(parse_action(a));
        return tx;
    }
    catch (const json::exception& e)
    {
        throw MalformedLog(std::string("missing or mistyped field: ") + e.what());
    }
}

void for_each_transaction(std::istream& in, const std::function<void(const TransactionRecord&)>& fn)
{
    std::string line;
    size_t number = 0;
    std::optional<int64_t> last;
    while (std::getline(in, line))
    {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        TransactionRecord tx;
        try
        {
            tx = parse_transaction(line);
        }
        catch (const MalformedLog& e)
        {
            throw MalformedLog("line " + std::to_string(number) + ": " + e.what());
        }
        if (last && tx.block_time < *last)
            throw MalformedLog("line " + std::to_string(number) + ": block_time goes backwards");
        last = tx.block_time;
        fn(tx);
    }
}

std::vector<TransactionRecord> read_log(std::istream& in)
{
    std::vector<TransactionRecord> out;
    for_each_transaction(in, [&](const TransactionRecord& tx) { out.push_back(tx); });
    return out;
}

std::string to_json_line(const TransactionRecord& tx)
{
    json acts = json::array();
    for (const auto& a : tx.actions)
    {
        json j{{"code_account", a.code_account},
               {"action_name", a.action_name},
               {"receiver", a.receiver},
               {"authorizers", a.authorizers}};
        if (a.transfer_payload)
        {
            const auto& p = *a.transfer_payload;
            j["transfer_payload"] = {
                {"from", p.from}, {"to", p.to}, {"quantity", p.quantity}, {"symbol", p.symbol}, {"issuer", p.issuer}};
        }
        acts.push_back(std::move(j));
    }
    json j{{"tx_id", tx.tx_id}, {"block_time", tx.block_time}, {"actions", std::move(acts)}};
    return j.dump();
}

// ---- fake EOS

FakeEosHeuristic::FakeEosHeuristic(std::set<std::string> victims, HeuristicConfig config)
  : victims_(std::move(victims)), config_(config)
{
}

void FakeEosHeuristic::feed(const TransactionRecord& tx)
{
    for (const auto& a : tx.actions)
    {
        if (!a.transfer_payload || a.is_notification() || !is_eos(*a.transfer_payload))
            continue;
        const auto& p = *a.transfer_payload;
        if (!is_true_eos(a))
        {
            if (victims_.count(p.to))
                pairs_[{p.from, p.to}].fake_sends.push_back({tx.block_time, tx.tx_id});
            continue;
        }
        if (victims_.count(p.to))
        {
            auto& pair = pairs_[{p.from, p.to}];
            pair.spent += p.quantity;
            add_unique(pair.evidence, tx.tx_id);
        }
        if (victims_.count(p.from))
        {
            auto it = pairs_.find({p.to, p.from});
            if (it == pairs_.end())
                continue;
            auto& pair = it->second;
            const auto horizon = tx.block_time - config_.window.count();
            std::erase_if(pair.fake_sends, [&](const Pending& f) { return f.time < horizon; });
            if (pair.fake_sends.empty())
                continue;
            pair.joined = true;
            pair.received += p.quantity;
            for (const auto& f : pair.fake_sends)
                add_unique(pair.evidence, f.tx_id);
            add_unique(pair.evidence, tx.tx_id);
        }
    }
}

std::vector<AttackFlag> FakeEosHeuristic::finish() const
{
    std::vector<AttackFlag> out;
    for (const auto& [key, pair] : pairs_)
    {
        if (!pair.joined)
            continue;
        AttackFlag f;
        f.kind = AttackKind::fake_eos;
        f.victim = key.second;
        f.suspects = {key.first};
        f.tx_ids = pair.evidence;
        f.gain_estimate = pair.received - pair.spent;
        f.confidence = escalates(pair.received, pair.spent, config_.ratio) ? Confidence::suspicious
                                                                          : Confidence::potential;
        out.push_back(std::move(f));
    }
    return out;
}

// ---- fake receipt

FakeReceiptHeuristic::FakeReceiptHeuristic(std::set<std::string> victims, HeuristicConfig config)
  : victims_(std::move(victims)), config_(config)
{
}

void FakeReceiptHeuristic::feed(const TransactionRecord& tx)
{
    for (const auto& a : tx.actions)
    {
        if (!is_true_eos(a))
            continue;
        const auto& p = *a.transfer_payload;
        if (a.is_notification())
        {
            const bool outsider = a.receiver != token_account && a.receiver != p.from && a.receiver != p.to;
            if (outsider && victims_.count(a.receiver))
            {
                auto& pair = pairs_[{p.from, a.receiver}];
                pair.receipts.push_back({tx.block_time, tx.tx_id, p.to});
                pair.accomplices.insert(p.to);
            }
            continue;
        }
        if (victims_.count(p.to))
        {
            auto& pair = pairs_[{p.from, p.to}];
            pair.spent += p.quantity;
            add_unique(pair.evidence, tx.tx_id);
        }
        if (victims_.count(p.from))
        {
            auto it = pairs_.find({p.to, p.from});
            if (it == pairs_.end())
                continue;
            auto& pair = it->second;
            const auto horizon = tx.block_time - config_.window.count();
            std::erase_if(pair.receipts, [&](const Receipt& r) { return r.time < horizon; });
            if (pair.receipts.empty())
                continue;
            pair.joined = true;
            pair.received += p.quantity;
            for (const auto& r : pair.receipts)
                add_unique(pair.evidence, r.tx_id);
            add_unique(pair.evidence, tx.tx_id);
        }
    }
}

std::vector<AttackFlag> FakeReceiptHeuristic::finish() const
{
    std::vector<AttackFlag> out;
    for (const auto& [key, pair] : pairs_)
    {
        if (!pair.joined)
            continue;
        AttackFlag f;
        f.kind = AttackKind::fake_receipt;
        f.victim = key.second;
        f.suspects = {key.first};
        for (const auto& acc : pair.accomplices)
            add_unique(f.suspects, acc);
        f.tx_ids = pair.evidence;
        f.gain_estimate = pair.received - pair.spent;
        f.confidence = escalates(pair.received, pair.spent, config_.ratio) ? Confidence::suspicious
                                                                          : Confidence::potential;
        out.push_back(std::move(f));
    }
    return out;
}

// ---- rollback

RollbackHeuristic::RollbackHeuristic(std::set<std::string> victims, std::map<std::string, std::string> labels)
  : victims_(std::move(victims)), labels_(std::move(labels))
{
}

void RollbackHeuristic::feed(const TransactionRecord& tx)
{
    std::vector<const ActionRecord*> acts;
    for (const auto& a : tx.actions)
        if (!a.is_notification())
            acts.push_back(&a);

    for (const auto* a : acts)
    {
        if (!is_true_eos(*a) || !victims_.count(a->transfer_payload->to))
            continue;
        auto& st = stats_[{a->transfer_payload->from, a->transfer_payload->to}];
        if (st.bets++ == 0)
            st.first = tx.block_time;
        st.last = tx.block_time;
    }
    if (acts.size() < 4)
        return;
    const auto& first = *acts.front();
    const auto& last = *acts.back();
    const auto& m1 = *acts[1];
    const auto& m2 = *acts[acts.size() - 2];
    if (first.code_account != last.code_account || !is_true_eos(m1) || !is_true_eos(m2))
        return;
    const auto& p1 = *m1.transfer_payload;
    const auto& p2 = *m2.transfer_payload;
    if (p1.from != p2.to || p1.to != p2.from)
        return;
    std::string victim;
    if (victims_.count(p1.from))
        victim = p1.from;
    else if (victims_.count(p1.to))
        victim = p1.to;
    else
        return;
    auto gambling = [&](const std::string& acct) {
        auto it = labels_.find(acct);
        if (it == labels_.end())
            return false;
        std::string c = it->second;
        std::ranges::transform(c, c.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        return c == "gambling" || c == "game";
    };
    if (!gambling(p1.from) && !gambling(p1.to))
        return;
    double outflow = 0, inflow = 0;
    for (const auto* p : {&p1, &p2})
    {
        if (p->from == victim)
            outflow += p->quantity;
        else
            inflow += p->quantity;
    }
    if (!(outflow > inflow))
        return;
    const std::string& player = p1.from == victim ? p1.to : p1.from;
    AttackFlag f;
    f.kind = AttackKind::rollback;
    f.victim = victim;
    f.suspects = {player};
    add_unique(f.suspects, first.code_account);
    f.tx_ids = {tx.tx_id};
    f.gain_estimate = outflow - inflow;
    f.confidence = Confidence::suspicious;
    flags_.push_back(std::move(f));
    auto& st = stats_[{player, victim}];
    ++st.wins;
}

std::vector<AttackFlag> RollbackHeuristic::finish() const
{
    return flags_;
}

std::vector<RateRow> RollbackHeuristic::rate_table() const
{
    std::vector<RateRow> out;
    for (const auto& [key, st] : stats_)
    {
        if (st.wins == 0)
            continue;
        RateRow r;
        r.suspect = key.first;
        r.victim = key.second;
        r.wins = st.wins;
        r.bets = st.bets;
        r.span_hours = static_cast<double>(st.last - st.first) / 3600.0;
        r.wins_per_hour = static_cast<double>(st.wins) / std::max(r.span_hours, 1.0);
        out.push_back(std::move(r));
    }
    return out;
}

// ---- missing permission

PermissionMisuseHeuristic::PermissionMisuseHeuristic(std::set<std::pair<std::string, std::string>> vulnerable_actions)
  : vulnerable_(std::move(vulnerable_actions))
{
}

void PermissionMisuseHeuristic::feed(const TransactionRecord& tx)
{
    for (const auto& a : tx.actions)
    {
        if (a.is_notification())
            continue;
        if (!vulnerable_.count({a.code_account, a.action_name}) && !vulnerable_.count({a.code_account, "*"}))
            continue;
        if (std::ranges::find(a.authorizers, a.code_account) != a.authorizers.end())
            continue;
        AttackFlag f;
        f.kind = AttackKind::missing_permission_misuse;
        f.victim = a.code_account;
        f.suspects = a.authorizers;
        f.tx_ids = {tx.tx_id};
        f.confidence = Confidence::suspicious;
        flags_.push_back(std::move(f));
    }
}

// ---- batch forms

std::vector<AttackFlag> flag_fake_eos_attacks(const std::vector<TransactionRecord>& log,
                                              const std::set<std::string>& victims,
                                              HeuristicConfig config)
{
    FakeEosHeuristic h(victims, config);
    for (const auto& tx : log)
        h.feed(tx);
    return h.finish();
}

std::vector<AttackFlag> flag_fake_receipt_attacks(const std::vector<TransactionRecord>& log,
                                                  const std::set<std::string>& victims,
                                                  HeuristicConfig config)
{
    FakeReceiptHeuristic h(victims, config);
    for (const auto& tx : log)
        h.feed(tx);
    return h.finish();
}

std::vector<AttackFlag> flag_rollback_attacks(const std::vector<TransactionRecord>& log,
                                              const std::set<std::string>& victims,
                                              const std::map<std::string, std::string>& labels,
                                              std::vector<RateRow>* rates)
{
    RollbackHeuristic h(victims, labels);
    for (const auto& tx : log)
        h.feed(tx);
    if (rates)
        *rates = h.rate_table();
    return h.finish();
}

std::vector<AttackFlag> flag_permission_misuse(const std::vector<TransactionRecord>& log,
                                               const std::set<std::pair<std::string, std::string>>& vulnerable_actions)
{
    PermissionMisuseHeuristic h(vulnerable_actions);
    for (const auto& tx : log)
        h.feed(tx);
    return h.finish();
}

AttackReport analyze_log(std::istream& in, const AttackTargets& targets, HeuristicConfig config)
{
    FakeEosHeuristic fake_eos(targets.fake_eos, config);
    FakeReceiptHeuristic fake_receipt(targets.fake_receipt, config);
    RollbackHeuristic rollback(targets.rollback, targets.labels);
    PermissionMisuseHeuristic misuse(targets.actions);
    for_each_transaction(in, [&](const TransactionRecord& tx) {
        fake_eos.feed(tx);
        fake_receipt.feed(tx);
        rollback.feed(tx);
        misuse.feed(tx);
    });
    AttackReport out;
    for (auto&& part : {fake_eos.finish(), fake_receipt.finish(), rollback.finish(), misuse.finish()})
        out.flags.insert(out.flags.end(), part.begin(), part.end());
    out.rollback_rates = rollback.rate_table();
    return out;
}

}  // namespace eosscan::attacks
