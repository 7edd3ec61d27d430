use rusqlite::{params, OptionalExtension, Row};

use super::{from_millis, parse_col, Repo, StoreError};
use crate::domain::{AccountKind, AccountRef, NpaNumber, NpaRosterEntry, PinRole, RegistrationPin};

/// Who is redeeming a pin and for what. A pin is only consumed when role
/// and department both match the pin's scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinClaim {
    pub role: PinRole,
    pub department: String,
    pub claimant: AccountRef,
}

const PIN_COLUMNS: &str = "pin_code, target_role, department, consumed, consumed_by_kind,
    consumed_by_id, created_by_kind, created_by_id, created_at FROM registration_pins";

fn account_ref(
    idx: usize,
    kind: Option<String>,
    id: Option<i64>,
) -> rusqlite::Result<Option<AccountRef>> {
    match (kind, id) {
        (Some(kind), Some(id)) => Ok(Some(AccountRef {
            kind: parse_col(idx, &kind, str::parse::<AccountKind>)?,
            id,
        })),
        _ => Ok(None),
    }
}

fn pin_from_row(row: &Row<'_>) -> rusqlite::Result<RegistrationPin> {
    let role: String = row.get(1)?;
    let created_by =
        account_ref(6, row.get(6)?, row.get(7)?)?.ok_or(rusqlite::Error::InvalidColumnType(
            6,
            "created_by_kind".into(),
            rusqlite::types::Type::Null,
        ))?;
    Ok(RegistrationPin {
        pin_code: row.get(0)?,
        target_role: parse_col(1, &role, str::parse::<PinRole>)?,
        department: row.get(2)?,
        consumed: row.get(3)?,
        consumed_by: account_ref(4, row.get(4)?, row.get(5)?)?,
        created_by,
        created_at: from_millis(row.get(8)?),
    })
}

fn roster_from_row(row: &Row<'_>) -> rusqlite::Result<NpaRosterEntry> {
    let npa: String = row.get(0)?;
    let claimed_by: Option<i64> = row.get(2)?;
    Ok(NpaRosterEntry {
        npa_number: parse_col(0, &npa, NpaNumber::parse)?,
        department: row.get(1)?,
        claimed: claimed_by.is_some(),
        claimed_by,
        created_at: from_millis(row.get(3)?),
    })
}

impl Repo<'_> {
    pub fn insert_pin(
        &self,
        code: &str,
        role: PinRole,
        department: &str,
        created_by: AccountRef,
    ) -> Result<RegistrationPin, StoreError> {
        self.live_department(department)?;
        self.conn.execute(
            "INSERT INTO registration_pins (pin_code, target_role, department, created_by_kind,
                                            created_by_id, created_at)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![
                code,
                role.as_str(),
                department,
                created_by.kind.as_str(),
                created_by.id,
                self.now_ms()
            ],
        )?;
        self.get_pin(code)
    }

    pub fn get_pin(&self, code: &str) -> Result<RegistrationPin, StoreError> {
        self.conn
            .query_row(
                &format!("SELECT {PIN_COLUMNS} WHERE pin_code = ?1"),
                [code],
                pin_from_row,
            )
            .optional()?
            .ok_or(StoreError::PinNotFound)
    }

    /// Pins filtered by department and target role when given, newest first.
    pub fn list_pins(
        &self,
        department: Option<&str>,
        role: Option<PinRole>,
    ) -> Result<Vec<RegistrationPin>, StoreError> {
        let mut stmt = self.conn.prepare(&format!(
            "SELECT {PIN_COLUMNS}
             WHERE (?1 IS NULL OR department = ?1) AND (?2 IS NULL OR target_role = ?2)
             ORDER BY created_at DESC, pin_code"
        ))?;
        let rows = stmt
            .query_map(params![department, role.map(PinRole::as_str)], pin_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Removes an unused pin. Consumed pins stay as the onboarding record.
    pub fn delete_unused_pin(&self, code: &str) -> Result<(), StoreError> {
        let n = self.conn.execute(
            "DELETE FROM registration_pins WHERE pin_code = ?1 AND consumed = 0",
            [code],
        )?;
        if n == 1 {
            return Ok(());
        }
        match self.get_pin(code) {
            Ok(_) => Err(StoreError::PinAlreadyConsumed),
            Err(e) => Err(e),
        }
    }

    /// Conditional update that flips `consumed` only while it is still 0 and
    /// the claim matches the pin's scope. When nothing changed, a follow-up
    /// read names the reason.
    pub fn redeem_pin(&self, code: &str, claim: &PinClaim) -> Result<RegistrationPin, StoreError> {
        let n = self.conn.execute(
            "UPDATE registration_pins
             SET consumed = 1, consumed_by_kind = ?1, consumed_by_id = ?2
             WHERE pin_code = ?3 AND consumed = 0 AND target_role = ?4 AND department = ?5",
            params![
                claim.claimant.kind.as_str(),
                claim.claimant.id,
                code,
                claim.role.as_str(),
                claim.department
            ],
        )?;
        let pin = self.get_pin(code)?;
        if n == 1 {
            return Ok(pin);
        }
        if pin.consumed {
            Err(StoreError::PinAlreadyConsumed)
        } else {
            Err(StoreError::PinScopeMismatch)
        }
    }

    pub fn insert_roster_entry(
        &self,
        npa: &NpaNumber,
        department: &str,
    ) -> Result<NpaRosterEntry, StoreError> {
        self.conn.execute(
            "INSERT INTO npa_roster (npa_number, department, created_at) VALUES (?1, ?2, ?3)",
            params![npa.as_str(), department, self.now_ms()],
        )?;
        self.roster_entry(npa)?.ok_or(StoreError::NotFound)
    }

    pub fn roster_entry(&self, npa: &NpaNumber) -> Result<Option<NpaRosterEntry>, StoreError> {
        Ok(self
            .conn
            .query_row(
                "SELECT npa_number, department, claimed_by, created_at FROM npa_roster WHERE npa_number = ?1",
                [npa.as_str()],
                roster_from_row,
            )
            .optional()?)
    }

    pub fn list_roster(&self, department: &str) -> Result<Vec<NpaRosterEntry>, StoreError> {
        let mut stmt = self.conn.prepare(
            "SELECT npa_number, department, claimed_by, created_at FROM npa_roster
             WHERE department = ?1 ORDER BY npa_number",
        )?;
        let rows = stmt
            .query_map([department], roster_from_row)?
            .collect::<Result<_, _>>()?;
        Ok(rows)
    }

    /// Marks a roster row as claimed by `cadet_id`. Returns false when the
    /// row was already claimed.
    pub fn claim_roster_entry(&self, npa: &NpaNumber, cadet_id: i64) -> Result<bool, StoreError> {
        let n = self.conn.execute(
            "UPDATE npa_roster SET claimed_by = ?1 WHERE npa_number = ?2 AND claimed_by IS NULL",
            params![cadet_id, npa.as_str()],
        )?;
        Ok(n == 1)
    }
}
