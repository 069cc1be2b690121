/// Instruction opening the decomposition prompt.
pub const DECOMPOSITION_INSTRUCTION: &str = "I'm going to ask you a question. I want you to \
decompose it into a series of non-composite noun concepts and attributes. If you are uncertain \
about concepts, only output attributes. You should wrap each concept and attribute in \
<sub_c></sub_c> tags. Once you have all the concepts you need to cover the question, output \
<FIN></FIN> tags.\nLet's go through some examples together.\n";

/// One worked question with its expected tag output.
#[derive(Debug, Clone, Copy)]
pub struct IclExample {
    pub question: &'static str,
    pub tags: &'static [&'static str],
}

impl IclExample {
    /// The answer block as the model is expected to produce it.
    pub fn answer(&self) -> String {
        let mut out = String::new();
        for tag in self.tags {
            out.push_str("<sub_c>");
            out.push_str(tag);
            out.push_str("</sub_c>\n");
        }
        out.push_str("<FIN></FIN>");
        out
    }
}

pub const ICL_EXAMPLES: [IclExample; 5] = [
    IclExample {
        question: "For movies with the keyword of \"civil war\", calculate the average revenue generated by these movies.",
        tags: &["movies:keyword", "movies:revenue"],
    },
    IclExample {
        question: "How many customers have a credit limit of not more than 100,000 and which customer made the highest total payment amount for the year 2004?",
        tags: &["customers:credit limit", "customers:payment amount", "year"],
    },
    IclExample {
        question: "What is the aircraft name for the flight with number 99?",
        tags: &["aircraft:name", "flight:number"],
    },
    IclExample {
        question: "On which day has it neither been foggy nor rained in the zip code of 94107?",
        tags: &["zip code", "weather"],
    },
    IclExample {
        question: "What is the id of the trip that started from the station with the highest dock count?",
        tags: &["trip:id", "station:dock count"],
    },
];

/// Instruction, the five worked examples, then the open question slot.
pub fn build_decomposition_prompt(query: &str) -> String {
    let mut prompt = String::from(DECOMPOSITION_INSTRUCTION);
    for example in &ICL_EXAMPLES {
        prompt.push_str("Question: ");
        prompt.push_str(example.question);
        prompt.push_str("\n\nAnswer:\n");
        prompt.push_str(&example.answer());
        prompt.push_str("\n\n");
    }
    prompt.push_str("Question: ");
    prompt.push_str(query);
    prompt.push_str("\n\nAnswer:");
    prompt
}
