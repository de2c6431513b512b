#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace eosscan::attacks {

struct TransferPayload
{
    std::string from;
    std::string to;
    double quantity = 0;
    std::string symbol;
    std::string issuer;
};

struct ActionRecord
{
    std::string code_account;
    std::string action_name;
    /// Notified account; equals code_account for the action itself.
    std::string receiver;
    std::vector<std::string> authorizers;
    std::optional<TransferPayload> transfer_payload;

    [[nodiscard]] bool is_notification() const { return receiver != code_account; }
};

struct TransactionRecord
{
    std::string tx_id;
    int64_t block_time = 0;
    std::vector<ActionRecord> actions;
};

enum class AttackKind : uint8_t
{
    fake_eos,
    fake_receipt,
    rollback,
    missing_permission_misuse,
};

enum class Confidence : uint8_t
{
    potential,
    suspicious,
};

std::string_view to_string(AttackKind k) noexcept;
std::string_view to_string(Confidence c) noexcept;

struct AttackFlag
{
    AttackKind kind = AttackKind::fake_eos;
    std::string victim;
    std::vector<std::string> suspects;
    std::vector<std::string> tx_ids;
    double gain_estimate = 0;
    Confidence confidence = Confidence::potential;
};

/// Per-suspect win statistics for rollback flags, left to the analyst.
struct RateRow
{
    std::string suspect;
    std::string victim;
    uint64_t wins = 0;
    uint64_t bets = 0;
    double span_hours = 0;
    double wins_per_hour = 0;
};

/// Parses one JSON line. Throws MalformedLog.
TransactionRecord parse_transaction(const std::string& line);
/// Calls `fn` per non-blank line, checking block_time never decreases.
void for_each_transaction(std::istream& in, const std::function<void(const TransactionRecord&)>& fn);
std::vector<TransactionRecord> read_log(std::istream& in);
/// Inverse of parse_transaction (single line, no trailing newline).
std::string to_json_line(const TransactionRecord& tx);

struct HeuristicConfig
{
    std::chrono::seconds window = std::chrono::hours(24);
    double ratio = 10.0;
};

/// Streaming form: feed transactions in log order, then finish().
class FakeEosHeuristic
{
public:
    FakeEosHeuristic(std::set<std::string> victims, HeuristicConfig config);
    void feed(const TransactionRecord& tx);
    std::vector<AttackFlag> finish() const;

private:
    struct Pending
    {
        int64_t time;
        std::string tx_id;
    };
    struct Pair
    {
        std::vector<Pending> fake_sends;
        std::vector<std::string> evidence;
        double received = 0;
        double spent = 0;
        bool joined = false;
    };
    std::set<std::string> victims_;
    HeuristicConfig config_;
    std::map<std::pair<std::string, std::string>, Pair> pairs_;
};

class FakeReceiptHeuristic
{
public:
    FakeReceiptHeuristic(std::set<std::string> victims, HeuristicConfig config);
    void feed(const TransactionRecord& tx);
    std::vector<AttackFlag> finish() const;

private:
    struct Receipt
    {
        int64_t time;
        std::string tx_id;
        std::string accomplice;
    };
    struct Pair
    {
        std::vector<Receipt> receipts;
        std::set<std::string> accomplices;
        std::vector<std::string> evidence;
        double received = 0;
        double spent = 0;
        bool joined = false;
    };
    std::set<std::string> victims_;
    HeuristicConfig config_;
    std::map<std::pair<std::string, std::string>, Pair> pairs_;
};

class RollbackHeuristic
{
public:
    /// `labels`: account -> category; gambling/game counterparties qualify.
    RollbackHeuristic(std::set<std::string> victims, std::map<std::string, std::string> labels);
    void feed(const TransactionRecord& tx);
    std::vector<AttackFlag> finish() const;
    std::vector<RateRow> rate_table() const;

private:
    struct Stats
    {
        uint64_t wins = 0;
        uint64_t bets = 0;
        int64_t first = 0;
        int64_t last = 0;
    };
    std::set<std::string> victims_;
    std::map<std::string, std::string> labels_;
    std::vector<AttackFlag> flags_;
    std::map<std::pair<std::string, std::string>, Stats> stats_;
};

class PermissionMisuseHeuristic
{
public:
    /// (account, action) pairs; action "*" matches any action of the account.
    explicit PermissionMisuseHeuristic(std::set<std::pair<std::string, std::string>> vulnerable_actions);
    void feed(const TransactionRecord& tx);
    std::vector<AttackFlag> finish() const { return flags_; }

private:
    std::set<std::pair<std::string, std::string>> vulnerable_;
    std::vector<AttackFlag> flags_;
};

std::vector<AttackFlag> flag_fake_eos_attacks(const std::vector<TransactionRecord>& log,
                                              const std::set<std::string>& victims,
                                              HeuristicConfig config = {});
std::vector<AttackFlag> flag_fake_receipt_attacks(const std::vector<TransactionRecord>& log,
                                                  const std::set<std::string>& victims,
                                                  HeuristicConfig config = {});
std::vector<AttackFlag> flag_rollback_attacks(const std::vector<TransactionRecord>& log,
                                              const std::set<std::string>& victims,
                                              const std::map<std::string, std::string>& labels,
                                              std::vector<RateRow>* rates = nullptr);
std::vector<AttackFlag> flag_permission_misuse(const std::vector<TransactionRecord>& log,
                                               const std::set<std::pair<std::string, std::string>>& vulnerable_actions);

/// What the scan report says is exploitable.
struct AttackTargets
{
    std::set<std::string> fake_eos;
    std::set<std::string> fake_receipt;
    std::set<std::string> rollback;
    std::set<std::pair<std::string, std::string>> actions;
    /// Labels carried over from the scan (account -> category).
    std::map<std::string, std::string> labels;
};

struct AttackReport
{
    std::vector<AttackFlag> flags;
    std::vector<RateRow> rollback_rates;
};

/// One streaming pass over the log with all four heuristics.
AttackReport analyze_log(std::istream& in, const AttackTargets& targets, HeuristicConfig config = {});

}  // namespace eosscan::attacks
