use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
}

impl Weekday {
    pub const ALL: [Weekday; 5] = [Weekday::Mon, Weekday::Tue, Weekday::Wed, Weekday::Thu, Weekday::Fri];

    pub fn full_name(self) -> &'static str {
        match self {
            Weekday::Mon => "Monday",
            Weekday::Tue => "Tuesday",
            Weekday::Wed => "Wednesday",
            Weekday::Thu => "Thursday",
            Weekday::Fri => "Friday",
        }
    }

    fn from_full_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.full_name() == s)
    }
}

/// Weekly meeting pattern: a set of days and a half-open interval in minutes
/// from midnight. Day order is kept as written (text may list
/// `['Tuesday', 'Monday']`), but comparisons treat the days as a set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeSlot {
    days: Vec<Weekday>,
    start: u16,
    end: u16,
}

impl TimeSlot {
    pub fn new(days: Vec<Weekday>, start: u16, end: u16) -> Result<Self> {
        if days.is_empty() {
            return Err(Error::InvalidSlot("no meeting days".into()));
        }
        for (i, d) in days.iter().enumerate() {
            if days[..i].contains(d) {
                return Err(Error::InvalidSlot(format!("{} listed twice", d.full_name())));
            }
        }
        if start >= end || end > 24 * 60 {
            return Err(Error::InvalidSlot(format!("bad interval {start}..{end}")));
        }
        Ok(Self { days, start, end })
    }

    pub fn days(&self) -> &[Weekday] {
        &self.days
    }

    pub fn start(&self) -> u16 {
        self.start
    }

    pub fn end(&self) -> u16 {
        self.end
    }

    fn day_mask(&self) -> u8 {
        self.days.iter().fold(0, |m, &d| m | (1 << d as u8))
    }

    /// True iff the slots share a day and their intervals intersect.
    /// Back-to-back slots do not overlap.
    pub fn overlaps(&self, other: &TimeSlot) -> bool {
        self.day_mask() & other.day_mask() != 0 && self.start < other.end && other.start < self.end
    }
}

fn write_clock(f: &mut fmt::Formatter<'_>, minutes: u16) -> fmt::Result {
    let (h, m) = (minutes / 60, minutes % 60);
    let suffix = if h < 12 { "AM" } else { "PM" };
    let h12 = match h % 12 {
        0 => 12,
        x => x,
    };
    write!(f, "{h12}:{m:02}{suffix}")
}

fn parse_clock(s: &str) -> Option<u16> {
    let (body, pm) = if let Some(b) = s.strip_suffix("AM") {
        (b, false)
    } else {
        (s.strip_suffix("PM")?, true)
    };
    let (h, m) = body.split_once(':')?;
    if h.is_empty() || h.len() > 2 || m.len() != 2 {
        return None;
    }
    let h: u16 = h.parse().ok()?;
    let m: u16 = m.parse().ok()?;
    if !(1..=12).contains(&h) || m >= 60 {
        return None;
    }
    let h24 = (h % 12) + if pm { 12 } else { 0 };
    Some(h24 * 60 + m)
}

/// `['Monday', 'Thursday'] at 11:30AM-12:45PM`
impl fmt::Display for TimeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, d) in self.days.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "'{}'", d.full_name())?;
        }
        f.write_str("] at ")?;
        write_clock(f, self.start)?;
        f.write_str("-")?;
        write_clock(f, self.end)
    }
}

impl FromStr for TimeSlot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSlot(String::from(s));
        let (days, times) = s.split_once("] at ").ok_or_else(bad)?;
        let days = days.strip_prefix('[').ok_or_else(bad)?;
        let days = days
            .split(", ")
            .map(|d| {
                d.strip_prefix('\'')
                    .and_then(|d| d.strip_suffix('\''))
                    .and_then(Weekday::from_full_name)
                    .ok_or_else(bad)
            })
            .collect::<Result<Vec<_>>>()?;
        let (a, b) = times.split_once('-').ok_or_else(bad)?;
        let start = parse_clock(a).ok_or_else(bad)?;
        let end = parse_clock(b).ok_or_else(bad)?;
        TimeSlot::new(days, start, end)
    }
}

impl TryFrom<String> for TimeSlot {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeSlot> for String {
    fn from(t: TimeSlot) -> String {
        alloc::string::ToString::to_string(&t)
    }
}
