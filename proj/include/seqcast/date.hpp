#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace seqcast {

/// Proleptic Gregorian calendar day, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    static constexpr Date from_days(std::int32_t days) noexcept {
        Date d;
        d.days_ = days;
        return d;
    }
    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Strict YYYY-MM-DD; returns nullopt for anything else, including
    /// impossible days such as 2021-02-30.
    static std::optional<Date> parse(std::string_view text) noexcept;

    constexpr std::int32_t days() const noexcept { return days_; }
    int year() const noexcept;
    unsigned month() const noexcept;
    unsigned day() const noexcept;
    /// 0 = Sunday ... 6 = Saturday.
    unsigned weekday() const noexcept;

    std::string iso() const;

    friend constexpr auto operator<=>(Date, Date) = default;

private:
    std::int32_t days_ = 0;
};

} // namespace seqcast
