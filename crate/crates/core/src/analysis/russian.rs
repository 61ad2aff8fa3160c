//! Light Russian stemmer: strips one case ending, then normalizes a trailing
//! soft sign, `и`, or doubled `н`.

const LONG: &[&str] = &["иями", "оями"];

const MEDIUM: &[&str] =
    &["иям", "иях", "оях", "ями", "оям", "оьв", "ами", "его", "ему", "ери", "ими", "ого", "ому", "ыми", "оев"];

const SHORT: &[&str] = &[
    "ая", "яя", "ях", "юю", "ах", "ею", "их", "ия", "ию", "ьв", "ою", "ую", "ям", "ых", "ея", "ам", "ем", "ей", "ём",
    "ев", "ий", "им", "ое", "ой", "ом", "ов", "ые", "ый", "ым", "ми",
];

pub fn stem(word: &str) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let len = remove_case(&chars);
    chars.truncate(len);
    let len = normalize(&chars);
    chars.truncate(len);
    chars.into_iter().collect()
}

fn ends_with(s: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    s.len() >= n && s[s.len() - n..].iter().copied().eq(suffix.chars())
}

fn remove_case(s: &[char]) -> usize {
    let len = s.len();
    if len > 6 && LONG.iter().any(|x| ends_with(s, x)) {
        return len - 4;
    }
    if len > 5 && MEDIUM.iter().any(|x| ends_with(s, x)) {
        return len - 3;
    }
    if len > 4 && SHORT.iter().any(|x| ends_with(s, x)) {
        return len - 2;
    }
    if len > 3 && matches!(s[len - 1], 'а' | 'е' | 'и' | 'о' | 'у' | 'й' | 'ы' | 'я' | 'ь') {
        return len - 1;
    }
    len
}

fn normalize(s: &[char]) -> usize {
    let len = s.len();
    if len > 3 {
        match s[len - 1] {
            'ь' | 'и' => return len - 1,
            'н' if s[len - 2] == 'н' => return len - 1,
            _ => {}
        }
    }
    len
}
