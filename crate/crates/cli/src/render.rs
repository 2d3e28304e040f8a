use dapt_core::table::aligned_rows;
use dapt_core::DistanceProfile;

/// Plain decimal notation with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i64 = exp.parse().expect("exponent is an integer");
    let mant: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{mant}", "0".repeat((-point) as usize))
    } else if point as usize >= mant.len() {
        format!("{mant}{}", "0".repeat(point as usize - mant.len()))
    } else {
        let (int, frac) = mant.split_at(point as usize);
        format!("{int}.{frac}")
    };
    if x < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

pub fn joined<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// `i`, `a_i`, `s_i` rows, highest `i` first.
pub fn profile_text(profile: &DistanceProfile) -> String {
    let h = profile.height();
    let levels: Vec<usize> = (1..=h).rev().collect();
    aligned_rows(&[
        ("i", levels.iter().map(ToString::to_string).collect()),
        ("a_i", levels.iter().map(|&i| profile.a(i).to_string()).collect()),
        ("s_i", levels.iter().map(|&i| profile.s(i).to_string()).collect()),
    ])
}

/// CSV rows `prefix,i,a_i,s_i`, highest `i` first.
pub fn profile_csv(prefix: &str, profile: &DistanceProfile) -> String {
    let mut out = String::new();
    for i in (1..=profile.height()).rev() {
        out.push_str(&format!("{prefix}{i},{},{}\n", profile.a(i), profile.s(i)));
    }
    out
}

pub fn json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values always serialize");
    s.push('\n');
    s
}
