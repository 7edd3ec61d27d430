use crate::error::ValidationError;

/// Lowercases and checks an email address: exactly one `@`, a non-empty
/// local part, and a dotted domain with no empty labels. Whitespace and
/// control characters are rejected anywhere.
pub fn validate_email(raw: &str) -> Result<String, ValidationError> {
    if raw.is_empty() || raw.len() > 191 || raw.chars().any(|c| c.is_whitespace() || c.is_control())
    {
        return Err(ValidationError::MalformedEmail);
    }
    let mut parts = raw.split('@');
    let (Some(local), Some(domain), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(ValidationError::MalformedEmail);
    };
    if local.is_empty() || !domain.contains('.') || domain.split('.').any(str::is_empty) {
        return Err(ValidationError::MalformedEmail);
    }
    Ok(raw.to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn folds_case() {
        assert_eq!(validate_email("A@b.co").unwrap(), "a@b.co");
    }

    #[test]
    fn rejects_shapes() {
        for bad in [
            "a@b", "a", "@b.co", "a@@b.co", "a@b@c.co", "a@.co", "a@b.", "a@b..co", "",
        ] {
            assert_eq!(
                validate_email(bad),
                Err(ValidationError::MalformedEmail),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn rejects_embedded_space() {
        assert_eq!(
            validate_email("a b@c.co"),
            Err(ValidationError::MalformedEmail)
        );
    }

    proptest! {
        #[test]
        fn any_whitespace_insertion_rejects(pos in 0usize..=6, ws in prop::sample::select(vec![' ', '\t', '\n', '\r', '\u{a0}', '\u{2003}'])) {
            let mut s: Vec<char> = "ab@c.co".chars().collect();
            s.insert(pos.min(s.len()), ws);
            let s: String = s.into_iter().collect();
            prop_assert_eq!(validate_email(&s), Err(ValidationError::MalformedEmail));
        }
    }
}
