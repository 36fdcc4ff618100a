//! ISO-8601 calendar handling on `i64` seconds since the Unix epoch.

use alloc::format;
use alloc::string::String;

const SECS_PER_DAY: i64 = 86_400;

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let m = month as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Inverse of [`days_from_civil`].
pub fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + i64::from(month <= 2);
    (year, month, day)
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        _ => {
            if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 {
                29
            } else {
                28
            }
        }
    }
}

fn digits(s: &[u8]) -> Option<u32> {
    if s.is_empty() || !s.iter().all(u8::is_ascii_digit) {
        return None;
    }
    s.iter().try_fold(0u32, |acc, d| acc.checked_mul(10)?.checked_add(u32::from(d - b'0')))
}

/// Parses `YYYY-MM-DD`, optionally followed by `T` or a space and
/// `HH:MM[:SS[.fff]]` and an optional `Z`. Returns seconds since the epoch.
pub fn parse_iso8601(text: &str) -> Option<i64> {
    let s = text.trim().as_bytes();
    if s.len() < 10 || s[4] != b'-' || s[7] != b'-' {
        return None;
    }
    let year = digits(&s[0..4])? as i64;
    let month = digits(&s[5..7])?;
    let day = digits(&s[8..10])?;
    if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
        return None;
    }
    let mut secs = days_from_civil(year, month, day) * SECS_PER_DAY;
    let rest = &s[10..];
    if rest.is_empty() {
        return Some(secs);
    }
    if rest[0] != b'T' && rest[0] != b' ' {
        return None;
    }
    let mut time = &rest[1..];
    if let Some(stripped) = time.strip_suffix(b"Z") {
        time = stripped;
    }
    if time.len() < 5 || time[2] != b':' {
        return None;
    }
    let hour = digits(&time[0..2])?;
    let minute = digits(&time[3..5])?;
    let mut second = 0;
    if time.len() > 5 {
        if time[5] != b':' || time.len() < 8 {
            return None;
        }
        second = digits(&time[6..8])?;
        let frac = &time[8..];
        if !frac.is_empty() && (frac[0] != b'.' || digits(&frac[1..]).is_none()) {
            return None;
        }
    }
    if hour > 23 || minute > 59 || second > 59 {
        return None;
    }
    secs += i64::from(hour * 3600 + minute * 60 + second);
    Some(secs)
}

/// Formats as `YYYY-MM-DD`, or `YYYY-MM-DDTHH:MM:SS` when a time part exists.
pub fn format_iso8601(secs: i64) -> String {
    let days = secs.div_euclid(SECS_PER_DAY);
    let tod = secs.rem_euclid(SECS_PER_DAY);
    let (y, m, d) = civil_from_days(days);
    if tod == 0 {
        format!("{y:04}-{m:02}-{d:02}")
    } else {
        format!(
            "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}",
            tod / 3600,
            (tod % 3600) / 60,
            tod % 60
        )
    }
}

/// Calendar granularity used to bucket temporal axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Year,
    Month,
    Day,
}

impl TimeUnit {
    /// Truncates a timestamp to the start of its bucket.
    pub fn truncate(self, secs: i64) -> i64 {
        let days = secs.div_euclid(SECS_PER_DAY);
        let (y, m, d) = civil_from_days(days);
        let start = match self {
            TimeUnit::Year => days_from_civil(y, 1, 1),
            TimeUnit::Month => days_from_civil(y, m, 1),
            TimeUnit::Day => days_from_civil(y, m, d),
        };
        start * SECS_PER_DAY
    }

    /// Coarsest unit under which `min` and `max` fall in different buckets.
    pub fn coarsest_distinguishing(min: i64, max: i64) -> TimeUnit {
        [TimeUnit::Year, TimeUnit::Month]
            .into_iter()
            .find(|unit| unit.truncate(min) != unit.truncate(max))
            .unwrap_or(TimeUnit::Day)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Year => "year",
            TimeUnit::Month => "yearmonth",
            TimeUnit::Day => "yearmonthdate",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn civil_roundtrip_across_eras() {
        for days in [-800_000i64, -1, 0, 1, 18_262, 2_932_896] {
            let (y, m, d) = civil_from_days(days);
            assert_eq!(days_from_civil(y, m, d), days);
        }
        assert_eq!(days_from_civil(2020, 1, 1), 18_262);
    }

    #[test]
    fn parses_dates_and_datetimes() {
        assert_eq!(parse_iso8601("1970-01-02"), Some(86_400));
        assert_eq!(parse_iso8601("2020-02-29"), Some(days_from_civil(2020, 2, 29) * 86_400));
        assert_eq!(parse_iso8601("1970-01-01T01:00:00Z"), Some(3600));
        assert_eq!(parse_iso8601("1970-01-01 00:01"), Some(60));
        assert_eq!(parse_iso8601("2021-02-29"), None);
        assert_eq!(parse_iso8601("2021-13-01"), None);
        assert_eq!(parse_iso8601("foo"), None);
        assert_eq!(parse_iso8601("2021-01-01X"), None);
    }

    #[test]
    fn format_matches_parse() {
        for text in ["2020-01-01", "1999-12-31T23:59:59", "1900-03-01"] {
            assert_eq!(format_iso8601(parse_iso8601(text).unwrap()), text);
        }
    }

    #[test]
    fn coarsest_unit() {
        let a = parse_iso8601("2020-01-01").unwrap();
        let b = parse_iso8601("2021-01-01").unwrap();
        let c = parse_iso8601("2020-03-01").unwrap();
        let d = parse_iso8601("2020-01-09").unwrap();
        assert_eq!(TimeUnit::coarsest_distinguishing(a, b), TimeUnit::Year);
        assert_eq!(TimeUnit::coarsest_distinguishing(a, c), TimeUnit::Month);
        assert_eq!(TimeUnit::coarsest_distinguishing(a, d), TimeUnit::Day);
        assert_eq!(TimeUnit::Month.truncate(d), a);
    }
}
