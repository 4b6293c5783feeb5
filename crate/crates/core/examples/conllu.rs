//! Read CoNLL-U parses keyed by `# doc_id`, filter othering relations and
//! write the graphs back out.
//!
//! ```bash
//! cargo run --example conllu
//! ```

use othering::parse::{
    filter_dependencies, filter_pos, heuristic_parse, read_conllu, write_conllu,
};

const PARSES: &str = "# doc_id = worked_example
# text = we want them out, send them all home for our country
1\twe\twe\tPRON\tPRP\t_\t2\tnsubj\t_\t_
2\twant\twant\tVERB\tVBP\t_\t0\troot\t_\t_
3\tthem\tthey\tPRON\tPRP\t_\t2\tobj\t_\t_
4\tout\tout\tADV\tRP\t_\t2\tcompound:prt\t_\t_
5\tsend\tsend\tVERB\tVB\t_\t2\tparataxis\t_\t_
6\tthem\tthey\tPRON\tPRP\t_\t5\tobj\t_\t_
7\tall\tall\tDET\tDT\t_\t8\tdet\t_\t_
8\thome\thome\tNOUN\tNN\t_\t5\tobl\t_\t_

";

fn main() -> othering::Result<()> {
    let graphs = read_conllu(PARSES.as_bytes())?;
    for g in &graphs {
        println!("{}:", g.doc_id());
        for pair in filter_dependencies(g) {
            println!("  {}", pair.feature());
        }
        println!("  words {:?}", filter_pos(g));
    }

    let tokens: Vec<String> = "they should deport us"
        .split(' ')
        .map(String::from)
        .collect();
    let fallback = heuristic_parse("unparsed", &tokens)?;
    let mut out = Vec::new();
    write_conllu(&[fallback], &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
