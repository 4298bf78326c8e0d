use serde::{Deserialize, Serialize};

use super::PromptError;

/// One planned generation pass: the cited papers it covers, its layout
/// label, the main-idea text guiding it, and the token estimate of its
/// full prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationUnit {
    pub unit_index: usize,
    pub cited_ids: Vec<String>,
    pub gold_layout_label: String,
    pub main_idea: Option<String>,
    pub estimated_tokens: usize,
}

/// Planning input: one cited paper and the token estimate of its rendered
/// per-paper block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPaper {
    pub paper_id: String,
    pub block_tokens: usize,
}

/// One gold-layout group: a subsection or titled paragraph of the gold
/// related-work section and the papers it cites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutGroup {
    pub label: String,
    pub cited_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSource {
    HumanProvided,
    CondensedFromGold,
}

/// Per-chunk main-idea texts guiding generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainIdeaPlan {
    pub ideas: Vec<String>,
    pub source: PlanSource,
}

/// Partitions the cited papers into generation units. A single unit is
/// returned whenever everything fits the budget; otherwise the gold layout
/// decides the grouping when given, and a greedy order-preserving packer
/// otherwise. Units are disjoint, covering, and order-preserving, each
/// estimated within budget; gold groups that alone exceed the budget are
/// split further, keeping their label.
pub fn plan_chunks(
    papers: &[ChunkPaper],
    gold_layout: Option<&[LayoutGroup]>,
    budget: usize,
    fixed_overhead_tokens: usize,
) -> Result<Vec<GenerationUnit>, PromptError> {
    if budget <= fixed_overhead_tokens {
        return Err(PromptError::BudgetTooSmall { budget, overhead: fixed_overhead_tokens });
    }
    for paper in papers {
        if fixed_overhead_tokens + paper.block_tokens > budget {
            return Err(PromptError::PaperBlockOverBudget {
                paper_id: paper.paper_id.clone(),
                tokens: fixed_overhead_tokens + paper.block_tokens,
                budget,
            });
        }
    }

    let total: usize = fixed_overhead_tokens + papers.iter().map(|p| p.block_tokens).sum::<usize>();
    if total <= budget {
        return Ok(vec![GenerationUnit {
            unit_index: 0,
            cited_ids: papers.iter().map(|p| p.paper_id.clone()).collect(),
            gold_layout_label: "related work".to_owned(),
            main_idea: None,
            estimated_tokens: total,
        }]);
    }

    let mut units = Vec::new();
    match gold_layout {
        Some(groups) => {
            check_layout_coverage(papers, groups)?;
            for group in groups {
                let members: Vec<ChunkPaper> = group
                    .cited_ids
                    .iter()
                    .map(|id| {
                        papers
                            .iter()
                            .find(|p| &p.paper_id == id)
                            .expect("coverage checked")
                            .clone()
                    })
                    .collect();
                pack_greedy(&members, &group.label, budget, fixed_overhead_tokens, &mut units);
            }
        }
        None => pack_greedy(papers, "", budget, fixed_overhead_tokens, &mut units),
    }
    for (i, unit) in units.iter_mut().enumerate() {
        unit.unit_index = i;
        if unit.gold_layout_label.is_empty() {
            unit.gold_layout_label = format!("part {}", i + 1);
        }
    }
    Ok(units)
}

fn pack_greedy(
    papers: &[ChunkPaper],
    label: &str,
    budget: usize,
    overhead: usize,
    units: &mut Vec<GenerationUnit>,
) {
    let mut current: Vec<String> = Vec::new();
    let mut tokens = overhead;
    for paper in papers {
        if !current.is_empty() && tokens + paper.block_tokens > budget {
            units.push(GenerationUnit {
                unit_index: 0,
                cited_ids: std::mem::take(&mut current),
                gold_layout_label: label.to_owned(),
                main_idea: None,
                estimated_tokens: tokens,
            });
            tokens = overhead;
        }
        tokens += paper.block_tokens;
        current.push(paper.paper_id.clone());
    }
    if !current.is_empty() {
        units.push(GenerationUnit {
            unit_index: 0,
            cited_ids: current,
            gold_layout_label: label.to_owned(),
            main_idea: None,
            estimated_tokens: tokens,
        });
    }
}

fn check_layout_coverage(
    papers: &[ChunkPaper],
    groups: &[LayoutGroup],
) -> Result<(), PromptError> {
    use std::collections::BTreeSet;
    let input: BTreeSet<&str> = papers.iter().map(|p| p.paper_id.as_str()).collect();
    let mut covered = BTreeSet::new();
    let mut extra = Vec::new();
    for id in groups.iter().flat_map(|g| &g.cited_ids) {
        if !input.contains(id.as_str()) || !covered.insert(id.as_str()) {
            extra.push(id.clone());
        }
    }
    let missing: Vec<String> = input
        .iter()
        .filter(|id| !covered.contains(**id))
        .map(|s| (*s).to_owned())
        .collect();
    if missing.is_empty() && extra.is_empty() {
        Ok(())
    } else {
        Err(PromptError::LayoutMismatch { missing, extra })
    }
}

/// Aligns plan ideas to units by index. When the plan has fewer ideas than
/// units the last idea is reused with a warning; surplus ideas warn too.
pub fn assign_main_ideas(units: &mut [GenerationUnit], plan: &MainIdeaPlan) -> Vec<String> {
    let mut warnings = Vec::new();
    if plan.ideas.is_empty() {
        warnings.push("main-idea plan is empty; units keep no main idea".to_owned());
        return warnings;
    }
    for (i, unit) in units.iter_mut().enumerate() {
        let idea = plan.ideas.get(i).unwrap_or_else(|| {
            plan.ideas.last().expect("non-empty checked")
        });
        unit.main_idea = Some(idea.clone());
    }
    if plan.ideas.len() < units.len() {
        warnings.push(format!(
            "plan has {} ideas for {} units; the last idea was reused",
            plan.ideas.len(),
            units.len()
        ));
    }
    if plan.ideas.len() > units.len() {
        warnings.push(format!(
            "plan has {} ideas but only {} units; surplus ideas ignored",
            plan.ideas.len(),
            units.len()
        ));
    }
    warnings
}

/// One unit of a plan file: units separated by a `---` line, an optional
/// `# label` heading, an optional `cited:` id list, then main-idea text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanUnit {
    pub label: Option<String>,
    pub cited_ids: Option<Vec<String>>,
    pub idea: String,
}

pub fn parse_plan_file(text: &str) -> Vec<PlanUnit> {
    text.split("\n---")
        .map(|chunk| {
            let mut label = None;
            let mut cited_ids = None;
            let mut idea_lines = Vec::new();
            for line in chunk.lines() {
                let trimmed = line.trim();
                if trimmed == "---" || trimmed.is_empty() {
                    continue;
                }
                if let Some(rest) = trimmed.strip_prefix("# ") {
                    label = Some(rest.trim().to_owned());
                } else if let Some(rest) = trimmed.strip_prefix("cited:") {
                    cited_ids = Some(
                        rest.split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(str::to_owned)
                            .collect(),
                    );
                } else {
                    idea_lines.push(trimmed.to_owned());
                }
            }
            PlanUnit { label, cited_ids, idea: idea_lines.join("\n") }
        })
        .filter(|u| u.label.is_some() || u.cited_ids.is_some() || !u.idea.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn papers(blocks: &[(&str, usize)]) -> Vec<ChunkPaper> {
        blocks
            .iter()
            .map(|(id, tokens)| ChunkPaper { paper_id: (*id).to_owned(), block_tokens: *tokens })
            .collect()
    }

    #[test]
    fn everything_fits_in_one_unit() {
        let units = plan_chunks(&papers(&[("a", 100), ("b", 100), ("c", 100)]), None, 1000, 200)
            .unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].cited_ids, vec!["a", "b", "c"]);
        assert_eq!(units[0].estimated_tokens, 500);
    }

    #[test]
    fn gold_layout_groups_become_units_in_gold_order() {
        let layout = vec![
            LayoutGroup { label: "early".into(), cited_ids: vec!["a".into(), "b".into()] },
            LayoutGroup { label: "late".into(), cited_ids: vec!["c".into()] },
        ];
        let units = plan_chunks(
            &papers(&[("a", 300), ("b", 300), ("c", 300)]),
            Some(&layout),
            800,
            100,
        )
        .unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].gold_layout_label, "early");
        assert_eq!(units[0].cited_ids, vec!["a", "b"]);
        assert_eq!(units[1].gold_layout_label, "late");
    }

    #[test]
    fn greedy_split_happens_after_paper_four_of_six() {
        // overhead 100 + four 200-token blocks = 900 <= 1000; adding the
        // fifth would overflow, so units are [1-4] and [5-6].
        let six = papers(&[("p1", 200), ("p2", 200), ("p3", 200), ("p4", 200), ("p5", 200), ("p6", 200)]);
        let units = plan_chunks(&six, None, 1000, 100).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].cited_ids, vec!["p1", "p2", "p3", "p4"]);
        assert_eq!(units[1].cited_ids, vec!["p5", "p6"]);
        assert!(units.iter().all(|u| u.estimated_tokens <= 1000));
    }

    #[test]
    fn single_oversized_block_names_the_paper() {
        let err = plan_chunks(&papers(&[("big", 2000)]), None, 1000, 100).unwrap_err();
        match err {
            PromptError::PaperBlockOverBudget { paper_id, .. } => assert_eq!(paper_id, "big"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn layout_must_cover_exactly() {
        let layout = vec![LayoutGroup { label: "only".into(), cited_ids: vec!["a".into()] }];
        let err =
            plan_chunks(&papers(&[("a", 600), ("b", 600)]), Some(&layout), 700, 50).unwrap_err();
        assert!(matches!(err, PromptError::LayoutMismatch { .. }));
    }

    #[test]
    fn fewer_ideas_than_units_reuses_the_last_with_warning() {
        let mut units = vec![
            GenerationUnit { unit_index: 0, cited_ids: vec![], gold_layout_label: "a".into(), main_idea: None, estimated_tokens: 0 },
            GenerationUnit { unit_index: 1, cited_ids: vec![], gold_layout_label: "b".into(), main_idea: None, estimated_tokens: 0 },
        ];
        let plan = MainIdeaPlan { ideas: vec!["only idea".into()], source: PlanSource::HumanProvided };
        let warnings = assign_main_ideas(&mut units, &plan);
        assert_eq!(units[1].main_idea.as_deref(), Some("only idea"));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn plan_file_round_trip() {
        let text = "# Early methods\ncited: a, b\nFirst the early methods.\n---\n# Later work\ncited: c\nThen newer systems.\n";
        let units = parse_plan_file(text);
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].label.as_deref(), Some("Early methods"));
        assert_eq!(units[0].cited_ids.as_deref(), Some(["a".to_owned(), "b".to_owned()].as_slice()));
        assert_eq!(units[1].idea, "Then newer systems.");
    }

    #[test]
    fn chunk_partition_is_disjoint_and_covering() {
        let six = papers(&[("p1", 400), ("p2", 150), ("p3", 400), ("p4", 300), ("p5", 250), ("p6", 100)]);
        let units = plan_chunks(&six, None, 700, 100).unwrap();
        let mut seen = Vec::new();
        for u in &units {
            for id in &u.cited_ids {
                assert!(!seen.contains(id), "id {id} appears twice");
                seen.push(id.clone());
            }
        }
        assert_eq!(seen, vec!["p1", "p2", "p3", "p4", "p5", "p6"]);
    }
}
