//! Writes the bundled symptom/disease survey table.
//!
//! ```text
//! cargo run -p medpredict-core --example generate_dataset -- data/symptom_survey.csv
//! ```
//!
//! Rows are sampled from per-disease symptom profiles. Each disease has two
//! presentations that stress different parts of its profile, a share of rows
//! present like a related disease, and closely related disease pairs are
//! told apart by which marker symptoms co-occur rather than by any single
//! symptom. The output is deterministic for a given seed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 4921;
const N_ROWS: usize = 4921;

struct Profile {
    disease: &'static str,
    symptoms: &'static [&'static str],
}

const PROFILES: &[Profile] = &[
    Profile { disease: "Fungal infection", symptoms: &["itching", "skin_rash", "nodal_skin_eruptions", "dischromic_patches"] },
    Profile { disease: "Allergy", symptoms: &["continuous_sneezing", "shivering", "chills", "watering_from_eyes"] },
    Profile { disease: "GERD", symptoms: &["stomach_pain", "acidity", "ulcers_on_tongue", "vomiting", "cough", "chest_pain"] },
    Profile { disease: "Chronic cholestasis", symptoms: &["itching", "vomiting", "yellowish_skin", "nausea", "loss_of_appetite", "abdominal_pain", "yellowing_of_eyes"] },
    Profile { disease: "Drug Reaction", symptoms: &["itching", "skin_rash", "stomach_pain", "burning_micturition", "spotting_urination"] },
    Profile { disease: "Peptic ulcer disease", symptoms: &["vomiting", "indigestion", "loss_of_appetite", "abdominal_pain", "passage_of_gases", "internal_itching"] },
    Profile { disease: "AIDS", symptoms: &["muscle_wasting", "patches_in_throat", "high_fever", "extra_marital_contacts"] },
    Profile { disease: "Diabetes", symptoms: &["fatigue", "weight_loss", "restlessness", "lethargy", "irregular_sugar_level", "blurred_and_distorted_vision", "obesity", "excessive_hunger", "increased_appetite", "polyuria"] },
    Profile { disease: "Gastroenteritis", symptoms: &["vomiting", "sunken_eyes", "dehydration", "diarrhoea"] },
    Profile { disease: "Bronchial Asthma", symptoms: &["fatigue", "cough", "high_fever", "breathlessness", "family_history", "mucoid_sputum"] },
    Profile { disease: "Hypertension", symptoms: &["headache", "chest_pain", "dizziness", "loss_of_balance", "lack_of_concentration"] },
    Profile { disease: "Migraine", symptoms: &["acidity", "indigestion", "headache", "blurred_and_distorted_vision", "excessive_hunger", "stiff_neck", "depression", "irritability", "visual_disturbances"] },
    Profile { disease: "Cervical spondylosis", symptoms: &["back_pain", "weakness_in_limbs", "neck_pain", "dizziness", "loss_of_balance"] },
    Profile { disease: "Paralysis (brain hemorrhage)", symptoms: &["vomiting", "headache", "weakness_of_one_body_side", "altered_sensorium"] },
    Profile { disease: "Jaundice", symptoms: &["itching", "vomiting", "fatigue", "weight_loss", "high_fever", "yellowish_skin", "dark_urine", "abdominal_pain"] },
    Profile { disease: "Malaria", symptoms: &["chills", "vomiting", "high_fever", "sweating", "headache", "nausea", "diarrhoea", "muscle_pain"] },
    Profile { disease: "Chicken pox", symptoms: &["itching", "skin_rash", "fatigue", "lethargy", "high_fever", "headache", "loss_of_appetite", "mild_fever", "swelled_lymph_nodes", "malaise", "red_spots_over_body"] },
    Profile { disease: "Dengue", symptoms: &["skin_rash", "chills", "joint_pain", "vomiting", "fatigue", "high_fever", "headache", "nausea", "loss_of_appetite", "pain_behind_the_eyes", "back_pain", "malaise", "muscle_pain", "red_spots_over_body"] },
    Profile { disease: "Typhoid", symptoms: &["chills", "vomiting", "fatigue", "high_fever", "headache", "nausea", "constipation", "abdominal_pain", "diarrhoea", "toxic_look_typhos", "belly_pain"] },
    Profile { disease: "hepatitis A", symptoms: &["joint_pain", "vomiting", "yellowish_skin", "dark_urine", "nausea", "loss_of_appetite", "abdominal_pain", "diarrhoea", "mild_fever", "yellowing_of_eyes", "muscle_pain"] },
    Profile { disease: "Hepatitis B", symptoms: &["itching", "fatigue", "lethargy", "yellowish_skin", "dark_urine", "loss_of_appetite", "abdominal_pain", "yellow_urine", "yellowing_of_eyes", "malaise", "receiving_blood_transfusion", "receiving_unsterile_injections"] },
    Profile { disease: "Hepatitis C", symptoms: &["fatigue", "yellowish_skin", "nausea", "loss_of_appetite", "yellowing_of_eyes", "family_history"] },
    Profile { disease: "Hepatitis D", symptoms: &["joint_pain", "vomiting", "fatigue", "yellowish_skin", "dark_urine", "nausea", "loss_of_appetite", "abdominal_pain", "yellowing_of_eyes"] },
    Profile { disease: "Hepatitis E", symptoms: &["joint_pain", "vomiting", "fatigue", "high_fever", "yellowish_skin", "dark_urine", "nausea", "loss_of_appetite", "abdominal_pain", "yellowing_of_eyes", "acute_liver_failure", "coma", "stomach_bleeding"] },
    Profile { disease: "Alcoholic hepatitis", symptoms: &["vomiting", "yellowish_skin", "abdominal_pain", "swelling_of_stomach", "distention_of_abdomen", "history_of_alcohol_consumption", "fluid_overload"] },
    Profile { disease: "Tuberculosis", symptoms: &["chills", "vomiting", "fatigue", "weight_loss", "cough", "high_fever", "breathlessness", "sweating", "loss_of_appetite", "mild_fever", "yellowing_of_eyes", "swelled_lymph_nodes", "malaise", "phlegm", "chest_pain", "blood_in_sputum"] },
    Profile { disease: "Common Cold", symptoms: &["continuous_sneezing", "chills", "fatigue", "cough", "high_fever", "headache", "swelled_lymph_nodes", "malaise", "phlegm", "throat_irritation", "redness_of_eyes", "sinus_pressure", "runny_nose", "congestion", "chest_pain", "loss_of_smell", "muscle_pain"] },
    Profile { disease: "Pneumonia", symptoms: &["chills", "fatigue", "cough", "high_fever", "breathlessness", "sweating", "malaise", "phlegm", "chest_pain", "fast_heart_rate", "rusty_sputum"] },
    Profile { disease: "Dimorphic hemorrhoids (piles)", symptoms: &["constipation", "pain_during_bowel_movements", "pain_in_anal_region", "bloody_stool", "irritation_in_anus"] },
    Profile { disease: "Heart attack", symptoms: &["vomiting", "breathlessness", "sweating", "chest_pain"] },
    Profile { disease: "Varicose veins", symptoms: &["fatigue", "cramps", "bruising", "obesity", "swollen_legs", "swollen_blood_vessels", "prominent_veins_on_calf"] },
    Profile { disease: "Hypothyroidism", symptoms: &["fatigue", "weight_gain", "cold_hands_and_feets", "mood_swings", "lethargy", "dizziness", "puffy_face_and_eyes", "enlarged_thyroid", "brittle_nails", "swollen_extremeties", "depression", "irritability", "abnormal_menstruation"] },
    Profile { disease: "Hyperthyroidism", symptoms: &["fatigue", "mood_swings", "weight_loss", "restlessness", "sweating", "diarrhoea", "fast_heart_rate", "excessive_hunger", "muscle_weakness", "irritability", "abnormal_menstruation"] },
    Profile { disease: "Hypoglycemia", symptoms: &["vomiting", "fatigue", "anxiety", "sweating", "headache", "nausea", "blurred_and_distorted_vision", "excessive_hunger", "drying_and_tingling_lips", "slurred_speech", "irritability", "palpitations"] },
    Profile { disease: "Osteoarthritis", symptoms: &["joint_pain", "neck_pain", "knee_pain", "hip_joint_pain", "swelling_joints", "painful_walking"] },
    Profile { disease: "Arthritis", symptoms: &["muscle_weakness", "stiff_neck", "swelling_joints", "movement_stiffness", "painful_walking"] },
    Profile { disease: "(vertigo) Paroxysmal Positional Vertigo", symptoms: &["vomiting", "headache", "nausea", "spinning_movements", "loss_of_balance", "unsteadiness"] },
    Profile { disease: "Acne", symptoms: &["skin_rash", "pus_filled_pimples", "blackheads", "scurring"] },
    Profile { disease: "Urinary tract infection", symptoms: &["burning_micturition", "bladder_discomfort", "foul_smell_of_urine", "continuous_feel_of_urine"] },
    Profile { disease: "Psoriasis", symptoms: &["skin_rash", "joint_pain", "skin_peeling", "silver_like_dusting", "small_dents_in_nails", "inflammatory_nails"] },
    Profile { disease: "Impetigo", symptoms: &["skin_rash", "high_fever", "blister", "red_sore_around_nose", "yellow_crust_ooze"] },
];

/// Diseases that are clinically easy to confuse with each other.
const RELATED: &[&[&str]] = &[
    &["Chronic cholestasis", "Jaundice", "hepatitis A", "Hepatitis B", "Hepatitis C", "Hepatitis D", "Hepatitis E", "Alcoholic hepatitis"],
    &["Common Cold", "Pneumonia", "Tuberculosis", "Bronchial Asthma", "Allergy"],
    &["GERD", "Peptic ulcer disease", "Gastroenteritis", "Heart attack"],
    &["Malaria", "Dengue", "Typhoid", "Chicken pox", "AIDS"],
    &["Diabetes", "Hypothyroidism", "Hyperthyroidism", "Hypoglycemia"],
    &["Osteoarthritis", "Arthritis", "Cervical spondylosis", "Varicose veins"],
    &["Fungal infection", "Drug Reaction", "Acne", "Psoriasis", "Impetigo"],
    &["Hypertension", "Migraine", "Paralysis (brain hemorrhage)", "(vertigo) Paroxysmal Positional Vertigo", "Urinary tract infection", "Dimorphic hemorrhoids (piles)"],
];

/// Disease pairs sharing a profile that differ only in which marker symptoms
/// co-occur: the first disease shows markers {0,1} or {2,3}, the second
/// {0,2} or {1,3}.
const MARKER_PAIRS: &[(&str, &str, [&str; 4])] = &[
    ("Hepatitis D", "Hepatitis E", ["acute_liver_failure", "coma", "stomach_bleeding", "dark_urine"]),
    ("Malaria", "Typhoid", ["sweating", "toxic_look_typhos", "belly_pain", "constipation"]),
    ("Hypothyroidism", "Hyperthyroidism", ["weight_gain", "weight_loss", "enlarged_thyroid", "fast_heart_rate"]),
    ("Osteoarthritis", "Arthritis", ["knee_pain", "hip_joint_pain", "movement_stiffness", "stiff_neck"]),
    ("Dengue", "Chicken pox", ["pain_behind_the_eyes", "swelled_lymph_nodes", "mild_fever", "joint_pain"]),
    ("GERD", "Peptic ulcer disease", ["ulcers_on_tongue", "passage_of_gases", "internal_itching", "chest_pain"]),
];

/// Chance that a row presents like a related disease.
const ATYPICAL: f64 = 0.04;
/// Chance of each symptom in the presentation's focus.
const P_IN: f64 = 0.8;
/// Chance of each remaining profile symptom.
const P_OUT: f64 = 0.1;
/// Chance of one symptom drawn from the whole vocabulary.
const P_NOISE: f64 = 0.1;
const P_MARKER: f64 = 0.95;

fn related(disease: &str) -> Vec<usize> {
    let group = RELATED.iter().find(|g| g.contains(&disease)).expect("every disease is grouped");
    group
        .iter()
        .filter(|&&d| d != disease)
        .map(|d| PROFILES.iter().position(|p| p.disease == *d).expect("known disease"))
        .collect()
}

struct Presentation {
    focus: Vec<&'static str>,
    rest: Vec<&'static str>,
}

/// Symptoms a disease presents with besides its markers. Both diseases of a
/// marker pair use the first one's profile.
fn base_symptoms(index: usize) -> Vec<&'static str> {
    let name = PROFILES[index].disease;
    match MARKER_PAIRS.iter().find(|(a, b, _)| *a == name || *b == name) {
        Some((a, _, markers)) => {
            let first = PROFILES.iter().find(|p| p.disease == *a).expect("known disease");
            first.symptoms.iter().copied().filter(|s| !markers.contains(s)).collect()
        }
        None => PROFILES[index].symptoms.to_vec(),
    }
}

fn presentations(index: usize, rng: &mut ChaCha8Rng) -> [Presentation; 2] {
    let mut shuffled = base_symptoms(index);
    shuffled.shuffle(rng);
    let m = shuffled.len();
    let width = (m * 3).div_ceil(5).max(2).min(m);
    let make = |focus: &[&'static str]| Presentation {
        focus: focus.to_vec(),
        rest: shuffled.iter().copied().filter(|s| !focus.contains(s)).collect(),
    };
    [make(&shuffled[..width]), make(&shuffled[m - width..])]
}

fn main() {
    let out = std::env::args().nth(1);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let all_symptoms: Vec<&str> = PROFILES
        .iter()
        .flat_map(|p| p.symptoms.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let presentations: Vec<[Presentation; 2]> = (0..PROFILES.len()).map(|d| presentations(d, &mut rng)).collect();
    let markers = |index: usize| -> Option<[Vec<&'static str>; 2]> {
        let name = PROFILES[index].disease;
        MARKER_PAIRS.iter().find_map(|(a, b, m)| {
            if *a == name {
                Some([vec![m[0], m[1]], vec![m[2], m[3]]])
            } else if *b == name {
                Some([vec![m[0], m[2]], vec![m[1], m[3]]])
            } else {
                None
            }
        })
    };

    let per_disease = N_ROWS / PROFILES.len();
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::with_capacity(N_ROWS);
    for (d, profile) in PROFILES.iter().enumerate() {
        let n = per_disease + usize::from(d < N_ROWS % PROFILES.len());
        let partners = related(profile.disease);
        for _ in 0..n {
            let source = if rng.random_bool(ATYPICAL) {
                *partners.choose(&mut rng).expect("groups have two or more diseases")
            } else {
                d
            };
            let pres = &presentations[source][rng.random_range(0..2)];
            let mut symptoms: BTreeSet<&str> = BTreeSet::new();
            for &s in &pres.focus {
                if rng.random_bool(P_IN) {
                    symptoms.insert(s);
                }
            }
            for &s in &pres.rest {
                if rng.random_bool(P_OUT) {
                    symptoms.insert(s);
                }
            }
            if let Some(m) = markers(source) {
                for &s in &m[rng.random_range(0..2)] {
                    if rng.random_bool(P_MARKER) {
                        symptoms.insert(s);
                    }
                }
            }
            while symptoms.len() < 2.min(pres.focus.len()) {
                symptoms.insert(pres.focus.choose(&mut rng).copied().expect("non-empty focus"));
            }
            if rng.random_bool(P_NOISE) {
                symptoms.insert(all_symptoms.choose(&mut rng).copied().expect("non-empty vocabulary"));
            }
            rows.push((d, symptoms.into_iter().collect()));
        }
    }
    rows.shuffle(&mut rng);

    let width = rows.iter().map(|(_, s)| s.len()).max().unwrap_or(1);
    let mut csv = String::from("disease");
    for i in 1..=width {
        write!(csv, ",symptom_{i}").unwrap();
    }
    csv.push('\n');
    for (d, symptoms) in &rows {
        csv.push_str(PROFILES[*d].disease);
        for i in 0..width {
            csv.push(',');
            if let Some(s) = symptoms.get(i) {
                csv.push_str(s);
            }
        }
        csv.push('\n');
    }
    match out {
        Some(path) => std::fs::write(&path, csv).expect("write dataset"),
        None => print!("{csv}"),
    }
}
